#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deltaforge/catalog.hpp"
#include "deltaforge/error.hpp"
#include "deltaforge/extrinsic.hpp"
#include "deltaforge/immersion.hpp"
#include "deltaforge/jet.hpp"

namespace deltaforge {

/**
 * @brief Intrinsic curvature at a point, obtained from h through the Gauss
 * equation  K(u∧v) = Σ_r [h_r(u,u) h_r(v,v) − h_r(u,v)²] + c  for orthonormal u, v.
 */
struct CurvatureData {
    double c = 0.0;
    int n = 0;
    std::vector<Eigen::MatrixXd> h; // in the orthonormal tangent frame
    Eigen::MatrixXd K;              // K(e_i∧e_j), zero diagonal
    double tau = 0.0;

    /// Gauss-equation sectional curvature for an orthonormal pair.
    double pair(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
        double k = c;
        for (const auto& hr : h) {
            const Eigen::VectorXd hu = hr * u;
            const double uv = hu.dot(v);
            k += hu.dot(u) * v.dot(hr * v) - uv * uv;
        }
        return k;
    }
};

inline CurvatureData make_curvature(const ExtrinsicData& ext) {
    CurvatureData cd;
    cd.c = ext.sf.curvature();
    cd.n = ext.n;
    cd.h = ext.h;
    cd.K = Eigen::MatrixXd::Zero(ext.n, ext.n);
    for (int i = 0; i < ext.n; ++i)
        for (int j = i + 1; j < ext.n; ++j) {
            const double k = cd.pair(Eigen::VectorXd::Unit(ext.n, i), Eigen::VectorXd::Unit(ext.n, j));
            cd.K(i, j) = cd.K(j, i) = k;
            cd.tau += k;
        }
    return cd;
}

/// Sectional curvature of span(u, v); u, v are in orthonormal-frame coordinates.
inline double sectional_curvature(const CurvatureData& cd, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v) {
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw DegeneratePlaneError("zero vector spans no plane");
    const Eigen::VectorXd e1 = u / nu;
    Eigen::VectorXd w = v - e1.dot(v) * e1;
    if (w.norm() < 1e-10 * nv) throw DegeneratePlaneError("vectors are linearly dependent");
    w.normalize();
    return cd.pair(e1, w);
}

inline double scalar_curvature_total(const CurvatureData& cd) { return cd.tau; }

inline constexpr double kOrthonormalTol = 1e-10;

/// τ(L) = Σ_{α<β} K(b_α∧b_β) for an orthonormal basis (columns of `basis`).
inline double scalar_curvature_subspace(const CurvatureData& cd, const Eigen::MatrixXd& basis) {
    if (basis.rows() != cd.n) throw DimensionError("basis vectors must have length n");
    const Eigen::Index r = basis.cols();
    const Eigen::MatrixXd gram = basis.transpose() * basis;
    if ((gram - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() > kOrthonormalTol)
        throw NonOrthonormalError("subspace basis is not orthonormal");
    double tau = 0.0;
    for (Eigen::Index a = 0; a < r; ++a)
        for (Eigen::Index b = a + 1; b < r; ++b) tau += cd.pair(basis.col(a), basis.col(b));
    return tau;
}

using MetricFn = std::function<Eigen::MatrixXd(std::span<const double>)>;
/// Christoffel symbols: gamma[k](i, j) = Γ^k_ij.
using Christoffels = std::vector<Eigen::MatrixXd>;

inline constexpr double kMetricFdStep = 1e-4;

namespace detail {

inline Eigen::MatrixXd checked_metric(const MetricFn& metric, std::span<const double> x) {
    Eigen::MatrixXd g = metric(x);
    if (!metric_is_positive_definite(g))
        throw DegenerateMetricError("metric is not positive definite at a stencil point");
    return g;
}

inline double fd_step(double base, double xi) { return base * std::max(1.0, std::abs(xi)); }

/// Fourth-order central difference of f along coordinate l of y (restored on return).
template <class F>
auto central_diff4(F&& f, std::vector<double>& y, int l, double h) {
    const double x0 = y[l];
    y[l] = x0 + h;
    auto d = f(y);
    y[l] = x0 - h;
    auto m1 = f(y);
    y[l] = x0 + 2 * h;
    auto p2 = f(y);
    y[l] = x0 - 2 * h;
    auto m2 = f(y);
    y[l] = x0;
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (8.0 * (d[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * h);
    return d;
}

} // namespace detail

/// Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij) with fourth-order central differences of g.
inline Christoffels christoffels_from_metric(const MetricFn& metric, std::span<const double> x,
                                             double h_step = kMetricFdStep) {
    const int n = static_cast<int>(x.size());
    const Eigen::MatrixXd g = detail::checked_metric(metric, x);
    std::vector<Eigen::MatrixXd> dg(n);
    std::vector<double> y(x.begin(), x.end());
    auto eval = [&](const std::vector<double>& z) { return std::vector{detail::checked_metric(metric, z)}; };
    for (int l = 0; l < n; ++l) dg[l] = detail::central_diff4(eval, y, l, detail::fd_step(h_step, x[l]))[0];
    const Eigen::MatrixXd ginv = g.llt().solve(Eigen::MatrixXd::Identity(n, n));
    Christoffels gamma(n, Eigen::MatrixXd::Zero(n, n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Eigen::VectorXd lower(n); // Γ_{ij,l}
            for (int l = 0; l < n; ++l) lower(l) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
            const Eigen::VectorXd upper = ginv * lower;
            for (int k = 0; k < n; ++k) gamma[k](i, j) = gamma[k](j, i) = upper(k);
        }
    return gamma;
}

/// Metric used by the residual checks: the closed form for catalog specs, the
/// (exact) induced metric otherwise.
inline MetricFn reference_metric(const ImmersionSpec& spec) {
    if (spec.family()) {
        const CatalogId id = *spec.family();
        const int n = spec.n();
        const ParamMap params = spec.params();
        return [id, n, params](std::span<const double> y) { return closed_form_metric(id, n, params, y); };
    }
    return [&spec](std::span<const double> y) {
        const Jet2 jet = detail::jet2_hyperdual_unchecked(spec, y);
        const int n = spec.n();
        Eigen::MatrixXd g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                g(i, j) = spec.spaceform().inner(jet.first.col(i), jet.first.col(j));
        return g;
    };
}

/// <R(∂_i,∂_j)∂_j, ∂_i> for all pairs from the metric alone: fourth-order
/// central differences of the Christoffel symbols, themselves differenced.
inline Eigen::MatrixXd intrinsic_curvature_from_metric(const MetricFn& metric,
                                                       std::span<const double> x,
                                                       double h_step = kMetricFdStep) {
    const int n = static_cast<int>(x.size());
    const Eigen::MatrixXd g = detail::checked_metric(metric, x);
    const Christoffels gamma = christoffels_from_metric(metric, x, h_step);
    std::vector<Christoffels> dgamma(n); // dgamma[l][m](i,j) = ∂_l Γ^m_ij
    std::vector<double> y(x.begin(), x.end());
    auto eval = [&](const std::vector<double>& z) { return christoffels_from_metric(metric, z, h_step); };
    for (int l = 0; l < n; ++l) dgamma[l] = detail::central_diff4(eval, y, l, detail::fd_step(h_step, x[l]));
    // R^m_{kij} = ∂_i Γ^m_jk − ∂_j Γ^m_ik + Γ^m_ip Γ^p_jk − Γ^m_jp Γ^p_ik, with k = j.
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double sum = 0.0;
            for (int m = 0; m < n; ++m) {
                double rm = dgamma[i][m](j, j) - dgamma[j][m](i, j);
                for (int p = 0; p < n; ++p)
                    rm += gamma[m](i, p) * gamma[p](j, j) - gamma[m](j, p) * gamma[p](i, j);
                sum += g(i, m) * rm;
            }
            R(i, j) = sum;
        }
    return R;
}


/// <R(∂_i,∂_j)∂_j, ∂_i> from the Gauss equation in coordinates.
inline Eigen::MatrixXd extrinsic_curvature_coords(const ExtrinsicData& ext) {
    const int n = ext.n;
    const double c = ext.sf.curvature();
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double v = c * (ext.g(i, i) * ext.g(j, j) - ext.g(i, j) * ext.g(i, j));
            for (const auto& B : ext.coord_h) v += B(i, i) * B(j, j) - B(i, j) * B(i, j);
            R(i, j) = v;
        }
    return R;
}

/// Max over coordinate pairs of |intrinsic − Gauss-equation| curvature.
inline double gauss_residual(const ImmersionSpec& spec, std::span<const double> x,
                             double h_step = kMetricFdStep) {
    const Jet2 jet = jet2_hyperdual(spec, x);
    const ExtrinsicData ext = compute_extrinsic(spec.spaceform(), jet);
    const Eigen::MatrixXd intrinsic = intrinsic_curvature_from_metric(reference_metric(spec), x, h_step);
    return (intrinsic - extrinsic_curvature_coords(ext)).cwiseAbs().maxCoeff();
}

/// |induced metric − closed-form metric|_max; catalog specs only.
inline double metric_match_residual(const ImmersionSpec& spec, std::span<const double> x) {
    if (!spec.family()) throw UnsupportedError("metric_match_residual needs a catalog spec");
    const Jet2 jet = jet2_hyperdual(spec, x);
    const Eigen::MatrixXd g = induced_metric(spec.spaceform(), jet);
    return (g - closed_form_metric(*spec.family(), spec.n(), spec.params(), x)).cwiseAbs().maxCoeff();
}

namespace detail {

/// Coordinate second fundamental form along the unit normal spanning the
/// first normal space, oriented to agree with `reference` when given.
inline Eigen::MatrixXd scalar_second_form(const ImmersionSpec& spec, std::span<const double> y,
                                          Eigen::VectorXd* normal_out,
                                          const Eigen::VectorXd* reference) {
    const Jet2 jet = detail::jet2_hyperdual_unchecked(spec, y);
    const ExtrinsicData ext = compute_extrinsic(spec.spaceform(), jet);
    const int n = spec.n();
    if (ext.q() == 0) {
        if (normal_out) *normal_out = Eigen::VectorXd();
        return Eigen::MatrixXd::Zero(n, n);
    }
    Eigen::VectorXd coeffs = Eigen::VectorXd::Unit(ext.q(), 0);
    if (ext.q() > 1 && first_normal_rank(ext) >= 1) coeffs = principal_normal_coefficients(ext);
    Eigen::VectorXd nu = ext.normal * coeffs;
    if (reference && reference->size() == nu.size() && spec.spaceform().inner(nu, *reference) < 0.0)
        nu = -nu;
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) b(i, j) = b(j, i) = spec.spaceform().inner(jet.second(i, j), nu);
    if (normal_out) *normal_out = nu;
    return b;
}

} // namespace detail

/**
 * @brief Codazzi residual max_{i,j,k} |∇_i b_jk − ∇_j b_ik| for effective
 * codimension one.
 *
 * b is the coordinate second fundamental form along the unit normal spanning
 * the first normal space; its derivatives are fourth-order central differences, the
 * connection comes from `reference_metric`.
 */
inline double codazzi_residual(const ImmersionSpec& spec, std::span<const double> x,
                               double h_step = kMetricFdStep) {
    {
        const ExtrinsicData ext = compute_extrinsic(spec.spaceform(), jet2_hyperdual(spec, x));
        if (first_normal_rank(ext) >= 2)
            throw RankError("Codazzi residual needs a first normal space of rank <= 1");
    }
    const int n = spec.n();
    Eigen::VectorXd nu0;
    const Eigen::MatrixXd b0 = detail::scalar_second_form(spec, x, &nu0, nullptr);
    if (nu0.size() == 0) return 0.0;

    std::vector<Eigen::MatrixXd> db(n);
    std::vector<double> y(x.begin(), x.end());
    auto eval = [&](const std::vector<double>& z) {
        return std::vector{detail::scalar_second_form(spec, z, nullptr, &nu0)};
    };
    for (int l = 0; l < n; ++l) db[l] = detail::central_diff4(eval, y, l, detail::fd_step(h_step, x[l]))[0];
    const Christoffels gamma = christoffels_from_metric(reference_metric(spec), x, h_step);
    auto cov = [&](int i, int j, int k) {
        double v = db[i](j, k);
        for (int l = 0; l < n; ++l) v -= gamma[l](i, j) * b0(l, k) + gamma[l](i, k) * b0(j, l);
        return v;
    };
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(cov(i, j, k) - cov(j, i, k)));
    return worst;
}

} // namespace deltaforge
