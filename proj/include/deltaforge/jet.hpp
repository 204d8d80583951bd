#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "deltaforge/error.hpp"
#include "deltaforge/hyperdual.hpp"
#include "deltaforge/immersion.hpp"

namespace deltaforge {

/// Position, first and second partials of an immersion at a chart point.
struct Jet2 {
    Eigen::VectorXd point;             // L(x), length N
    Eigen::MatrixXd first;             // N x n, column i = ∂_i L
    std::vector<Eigen::VectorXd> hess; // n*n entries, ∂_i∂_j L at i*n + j
    int n = 0;

    Jet2() = default;
    Jet2(int flat_dim, int n_)
        : point(Eigen::VectorXd::Zero(flat_dim)), first(Eigen::MatrixXd::Zero(flat_dim, n_)),
          hess(static_cast<std::size_t>(n_ * n_), Eigen::VectorXd::Zero(flat_dim)), n(n_) {}

    int flat_dim() const { return static_cast<int>(point.size()); }
    const Eigen::VectorXd& second(int i, int j) const { return hess[i * n + j]; }
    Eigen::VectorXd& second(int i, int j) { return hess[i * n + j]; }

    /// Largest absolute entrywise difference to another jet of the same shape.
    double max_abs_diff(const Jet2& o) const {
        double d = (point - o.point).cwiseAbs().maxCoeff();
        d = std::max(d, (first - o.first).cwiseAbs().maxCoeff());
        for (std::size_t k = 0; k < hess.size(); ++k)
            d = std::max(d, (hess[k] - o.hess[k]).cwiseAbs().maxCoeff());
        return d;
    }
};

namespace detail {

/// No domain check: for stencil neighbours of a checked point.
inline Jet2 jet2_hyperdual_unchecked(const ImmersionSpec& spec, std::span<const double> x) {
    const int n = spec.n();
    const int N = spec.flat_dim();
    Jet2 jet(N, n);
    std::vector<HyperDuald> args(n);
    std::vector<HyperDuald> out(N);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            for (int k = 0; k < n; ++k) args[k] = HyperDuald::variable(x[k], k == i, k == j);
            spec.evaluate<HyperDuald>(args, out);
            for (int r = 0; r < N; ++r) {
                if (i == 0 && j == 0) jet.point(r) = out[r].value;
                if (j == i) jet.first(r, i) = out[r].d1;
                if (i == 0) jet.first(r, j) = out[r].d2;
                jet.second(i, j)(r) = out[r].d12;
            }
            jet.second(j, i) = jet.second(i, j);
        }
    }
    return jet;
}

} // namespace detail

/// Exact 2-jet: one hyper-dual evaluation per index pair i <= j.
inline Jet2 jet2_hyperdual(const ImmersionSpec& spec, std::span<const double> x) {
    spec.require_inside(x);
    return detail::jet2_hyperdual_unchecked(spec, x);
}

struct FdJet {
    Jet2 jet;
    bool shrunk = false; // stencil was shortened to stay inside the domain box
};

/**
 * @brief Central-difference 2-jet, used only as a cross-check oracle.
 *
 * With an explicit `step` the same step is used for every derivative and a
 * stencil leaving the domain box raises DomainError. The default policy uses
 * cbrt(eps)·max(1,|x_i|) for first derivatives and eps^(1/4)·max(1,|x_i|)
 * for second derivatives, shrinking either near the box boundary.
 */
inline FdJet jet2_finite_difference(const ImmersionSpec& spec, std::span<const double> x,
                                    std::optional<double> step = std::nullopt) {
    spec.require_inside(x);
    if (step && !(*step > 0.0)) throw DomainError("finite-difference step must be positive");
    const int n = spec.n();
    const int N = spec.flat_dim();
    constexpr double eps = std::numeric_limits<double>::epsilon();
    FdJet res{Jet2(N, n), false};
    Jet2& jet = res.jet;

    auto room = [&](int i) {
        const auto& iv = spec.domain()[i];
        return std::min(x[i] - iv.lo, iv.hi - x[i]);
    };
    auto pick = [&](int i, double base) {
        double h = step ? *step : base * std::max(1.0, std::abs(x[i]));
        if (h > room(i)) {
            if (step || room(i) <= 0.0)
                throw DomainError("finite-difference stencil leaves the domain at x" +
                                  std::to_string(i + 1));
            h = room(i);
            res.shrunk = true;
        }
        return h;
    };
    std::vector<double> h1(n), h2(n);
    for (int i = 0; i < n; ++i) {
        h1[i] = pick(i, std::cbrt(eps));
        h2[i] = pick(i, std::sqrt(std::sqrt(eps)));
    }

    std::vector<double> xs(x.begin(), x.end());
    auto eval = [&](const std::vector<double>& at) { return spec.position(at); };
    auto shifted = [&](int i, double di, int j, double dj) {
        xs.assign(x.begin(), x.end());
        xs[i] += di;
        if (j >= 0) xs[j] += dj;
        return eval(xs);
    };

    jet.point = spec.position(x);
    for (int i = 0; i < n; ++i) {
        jet.first.col(i) = (shifted(i, h1[i], -1, 0) - shifted(i, -h1[i], -1, 0)) / (2.0 * h1[i]);
        jet.second(i, i) = (shifted(i, h2[i], -1, 0) - 2.0 * jet.point + shifted(i, -h2[i], -1, 0)) /
                           (h2[i] * h2[i]);
        for (int j = i + 1; j < n; ++j) {
            const double hi = h2[i], hj = h2[j];
            jet.second(i, j) = (shifted(i, hi, j, hj) - shifted(i, hi, j, -hj) -
                                shifted(i, -hi, j, hj) + shifted(i, -hi, j, -hj)) /
                               (4.0 * hi * hj);
            jet.second(j, i) = jet.second(i, j);
        }
    }
    return res;
}

} // namespace deltaforge
