#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "deltaforge/error.hpp"

namespace deltaforge {

enum class SpaceKind { Euclidean, Sphere, Hyperbolic };

inline std::string_view to_string(SpaceKind k) {
    switch (k) {
    case SpaceKind::Euclidean: return "euclidean";
    case SpaceKind::Sphere: return "sphere";
    case SpaceKind::Hyperbolic: return "hyperbolic";
    }
    return "?";
}

inline SpaceKind parse_space_kind(std::string_view s) {
    if (s == "euclidean") return SpaceKind::Euclidean;
    if (s == "sphere") return SpaceKind::Sphere;
    if (s == "hyperbolic") return SpaceKind::Hyperbolic;
    throw ConfigError("unknown space form kind '" + std::string(s) + "'");
}

/**
 * @brief Real space form R^m(c) together with its flat model.
 *
 * Euclidean: E^m itself. Sphere: unit sphere in E^{m+1}. Hyperbolic: upper
 * sheet of {<u,u> = -1} in Minkowski E^{m+1}_1, with the timelike axis at
 * flat index 0.
 */
class SpaceForm {
public:
    SpaceForm(SpaceKind kind, int m) : kind_(kind), m_(m) {
        if (m < 2) throw RangeError("space form dimension must be at least 2");
    }

    static SpaceForm euclidean(int m) { return {SpaceKind::Euclidean, m}; }
    static SpaceForm sphere(int m) { return {SpaceKind::Sphere, m}; }
    static SpaceForm hyperbolic(int m) { return {SpaceKind::Hyperbolic, m}; }

    SpaceKind kind() const { return kind_; }
    int m() const { return m_; }
    int flat_dim() const { return kind_ == SpaceKind::Euclidean ? m_ : m_ + 1; }

    /// Sectional curvature c in {0, +1, -1}.
    double curvature() const {
        switch (kind_) {
        case SpaceKind::Euclidean: return 0.0;
        case SpaceKind::Sphere: return 1.0;
        case SpaceKind::Hyperbolic: return -1.0;
        }
        return 0.0;
    }

    bool curved() const { return kind_ != SpaceKind::Euclidean; }

    Eigen::VectorXd signature() const {
        Eigen::VectorXd s = Eigen::VectorXd::Ones(flat_dim());
        if (kind_ == SpaceKind::Hyperbolic) s(0) = -1.0;
        return s;
    }

    /// Signature-aware inner product of two flat-model vectors.
    template <typename A, typename B>
    double inner(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) const {
        if (u.size() != flat_dim() || v.size() != flat_dim())
            throw DimensionError("expected flat vectors of length " + std::to_string(flat_dim()) +
                                 ", got " + std::to_string(u.size()) + " and " +
                                 std::to_string(v.size()));
        double s = u.dot(v);
        if (kind_ == SpaceKind::Hyperbolic) s -= 2.0 * u(0) * v(0);
        return s;
    }

    bool operator==(const SpaceForm&) const = default;

private:
    SpaceKind kind_;
    int m_;
};

template <typename A, typename B>
double ambient_inner(const SpaceForm& sf, const Eigen::MatrixBase<A>& u,
                     const Eigen::MatrixBase<B>& v) {
    return sf.inner(u, v);
}

struct QuadricResult {
    double residual = 0.0;
    bool upper_sheet = true; // hyperbolic only: p[0] > 0
};

/// |<p,p> - c·1| with c the model radius sign; Euclidean has no quadric.
template <typename A>
QuadricResult quadric_check(const SpaceForm& sf, const Eigen::MatrixBase<A>& p) {
    if (!sf.curved()) throw KindError("quadric_check is undefined for Euclidean space");
    QuadricResult r;
    r.residual = std::abs(sf.inner(p, p) - sf.curvature());
    if (sf.kind() == SpaceKind::Hyperbolic) r.upper_sheet = p(0) > 0.0;
    return r;
}

} // namespace deltaforge
