#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deltaforge/error.hpp"
#include "deltaforge/immersion.hpp"
#include "deltaforge/jet.hpp"
#include "deltaforge/spaceform.hpp"

namespace deltaforge {

/// Relative pivot below which a metric counts as degenerate.
inline constexpr double kMetricPivotTol = 1e-14;
/// A metric failing definiteness by less than this is retried at a nearby point.
inline constexpr double kDegenerateRetryMargin = 1e-10;
inline constexpr double kDefaultZeroTol = 1e-7;

/// Smallest Cholesky pivot of a symmetric matrix (negative or tiny => not PD).
inline double min_cholesky_pivot(const Eigen::MatrixXd& g) {
    const int n = static_cast<int>(g.rows());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    double min_pivot = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        double d = g(k, k) - L.row(k).head(k).squaredNorm();
        min_pivot = std::min(min_pivot, d);
        if (d <= 0.0) return min_pivot;
        L(k, k) = std::sqrt(d);
        for (int i = k + 1; i < n; ++i)
            L(i, k) = (g(i, k) - L.row(i).head(k).dot(L.row(k).head(k))) / L(k, k);
    }
    return min_pivot;
}

inline bool metric_is_positive_definite(const Eigen::MatrixXd& g) {
    const double scale = std::max(1.0, g.diagonal().cwiseAbs().maxCoeff());
    return min_cholesky_pivot(g) > kMetricPivotTol * scale;
}

/// g_ij = <∂_i L, ∂_j L> in the ambient (possibly Lorentzian) inner product.
inline Eigen::MatrixXd induced_metric(const SpaceForm& sf, const Jet2& jet) {
    const int n = jet.n;
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) g(i, j) = g(j, i) = sf.inner(jet.first.col(i), jet.first.col(j));
    if (!metric_is_positive_definite(g))
        throw DegenerateMetricError("induced metric is not positive definite (min pivot " +
                                    format_real(min_cholesky_pivot(g)) + ")");
    return g;
}

struct TangentFrame {
    Eigen::MatrixXd vectors; // N x n, orthonormal columns E_a
    Eigen::MatrixXd coeffs;  // n x n, E_a = Σ_i coeffs(i, a) ∂_i L (upper triangular)
};

namespace detail {

/// Ambient Gram matrix of the columns of V.
inline Eigen::MatrixXd ambient_gram(const SpaceForm& sf, const Eigen::MatrixXd& V) {
    Eigen::MatrixXd SV = V;
    if (sf.kind() == SpaceKind::Hyperbolic) SV.row(0) *= -1.0;
    return V.transpose() * SV;
}

inline Eigen::MatrixXd upper_cholesky_inverse(const Eigen::MatrixXd& g) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw DegenerateMetricError("metric is not positive definite");
    Eigen::MatrixXd R = llt.matrixU();
    return R.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(g.rows(), g.cols()));
}

} // namespace detail

/// Gram–Schmidt of the coordinate tangent vectors (first vector ∥ ∂_1 L),
/// run twice for accuracy on poorly conditioned charts.
inline TangentFrame tangent_orthonormal_frame(const SpaceForm& sf, const Jet2& jet,
                                              const Eigen::MatrixXd& g) {
    if (!metric_is_positive_definite(g))
        throw DegenerateMetricError("tangent frame needs a positive definite metric");
    TangentFrame f;
    f.coeffs = detail::upper_cholesky_inverse(g);
    f.vectors = jet.first * f.coeffs;
    const Eigen::MatrixXd fix = detail::upper_cholesky_inverse(detail::ambient_gram(sf, f.vectors));
    f.coeffs = f.coeffs * fix;
    f.vectors = jet.first * f.coeffs;
    return f;
}

inline int normal_rank_count(const SpaceForm& sf, int n) {
    return sf.flat_dim() - n - (sf.curved() ? 1 : 0);
}

/**
 * @brief Orthonormal basis of the normal space of the submanifold inside the
 * space form.
 *
 * Standard basis vectors are projected off the tangent frame (and the
 * position, for curved models); at each step the candidate with the largest
 * remaining norm is taken, ties going to the lowest index.
 */
inline Eigen::MatrixXd normal_frame(const SpaceForm& sf, const Jet2& jet,
                                    const Eigen::MatrixXd& tangent) {
    const int N = sf.flat_dim();
    const int n = static_cast<int>(tangent.cols());
    const int q = normal_rank_count(sf, n);
    if (q < 0) throw DimensionError("immersion dimension exceeds the space form dimension");

    std::vector<Eigen::VectorXd> basis;
    std::vector<double> self; // <b,b> = ±1
    for (int a = 0; a < n; ++a) {
        basis.push_back(tangent.col(a));
        self.push_back(1.0);
    }
    if (sf.curved()) {
        const double pp = sf.inner(jet.point, jet.point);
        basis.push_back(jet.point / std::sqrt(std::abs(pp)));
        self.push_back(pp > 0 ? 1.0 : -1.0);
    }
    auto project = [&](Eigen::VectorXd v) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t b = 0; b < basis.size(); ++b)
                v -= (sf.inner(v, basis[b]) / self[b]) * basis[b];
        return v;
    };

    Eigen::MatrixXd normals(N, q);
    std::vector<bool> used(N, false);
    for (int r = 0; r < q; ++r) {
        int best = -1;
        double best_norm = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd best_v;
        for (int k = 0; k < N; ++k) {
            if (used[k]) continue;
            Eigen::VectorXd v = project(Eigen::VectorXd::Unit(N, k));
            const double nn = sf.inner(v, v);
            if (nn > best_norm * (1.0 + 1e-12) + 1e-300) {
                best = k;
                best_norm = nn;
                best_v = v;
            }
        }
        if (best < 0 || best_norm <= 1e-24) {
            if (best_norm < -1e-12)
                throw SignatureError("normal candidate has negative self inner product");
            throw DegenerateMetricError("could not complete the normal frame");
        }
        used[best] = true;
        Eigen::VectorXd v = best_v / std::sqrt(best_norm);
        v = project(v);
        v /= std::sqrt(sf.inner(v, v));
        normals.col(r) = v;
        basis.push_back(v);
        self.push_back(1.0);
    }
    return normals;
}

/// Extrinsic geometry at one chart point.
struct ExtrinsicData {
    SpaceForm sf{SpaceKind::Euclidean, 2};
    int n = 0;
    Eigen::VectorXd point;
    Eigen::MatrixXd g;
    TangentFrame tangent;
    Eigen::MatrixXd normal;              // N x q, oriented so trace(h_r) >= 0
    std::vector<Eigen::MatrixXd> coord_h; // q matrices <∂_i∂_j L, ξ_r>
    std::vector<Eigen::MatrixXd> h;       // q matrices in the orthonormal tangent frame
    Eigen::VectorXd H_vec;
    double H_sq = 0.0;

    int q() const { return static_cast<int>(h.size()); }
};

/**
 * @brief Second fundamental form, mean curvature vector and |H|².
 *
 * Projecting ∂²L onto the normal frame discards the tangential part and, on
 * curved models, the radial part. Each normal is flipped if needed so that
 * trace(h_r) >= 0.
 */
inline ExtrinsicData second_fundamental_form(const SpaceForm& sf, const Jet2& jet,
                                             const Eigen::MatrixXd& g, const TangentFrame& tangent,
                                             Eigen::MatrixXd normal) {
    const int n = jet.n;
    const int q = static_cast<int>(normal.cols());
    ExtrinsicData e;
    e.sf = sf;
    e.n = n;
    e.point = jet.point;
    e.g = g;
    e.tangent = tangent;
    for (int r = 0; r < q; ++r) {
        Eigen::MatrixXd B(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) B(i, j) = B(j, i) = sf.inner(jet.second(i, j), normal.col(r));
        Eigen::MatrixXd hr = tangent.coeffs.transpose() * B * tangent.coeffs;
        hr = 0.5 * (hr + hr.transpose()).eval();
        if (hr.trace() < 0.0) {
            hr = -hr;
            B = -B;
            normal.col(r) *= -1.0;
        }
        e.coord_h.push_back(B);
        e.h.push_back(hr);
    }
    e.normal = std::move(normal);
    e.H_vec = Eigen::VectorXd::Zero(sf.flat_dim());
    for (int r = 0; r < q; ++r) e.H_vec += (e.h[r].trace() / n) * e.normal.col(r);
    e.H_sq = sf.inner(e.H_vec, e.H_vec);
    return e;
}

inline ExtrinsicData compute_extrinsic(const SpaceForm& sf, const Jet2& jet) {
    const Eigen::MatrixXd g = induced_metric(sf, jet);
    const TangentFrame t = tangent_orthonormal_frame(sf, jet, g);
    return second_fundamental_form(sf, jet, g, t, normal_frame(sf, jet, t.vectors));
}

struct ShapeSpectrum {
    std::vector<Eigen::VectorXd> eigenvalues; // per normal, descending
    double zero_tolerance = kDefaultZeroTol;
};

inline Eigen::VectorXd symmetric_eigenvalues_desc(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EvalError("symmetric eigensolver did not converge");
    return es.eigenvalues().reverse();
}

inline ShapeSpectrum shape_spectrum(const ExtrinsicData& ext, double zero_tol = kDefaultZeroTol) {
    ShapeSpectrum s;
    s.zero_tolerance = zero_tol;
    for (const auto& hr : ext.h) s.eigenvalues.push_back(symmetric_eigenvalues_desc(hr));
    return s;
}

namespace detail {

/// q x n(n+1)/2 matrix of upper-triangular h components.
inline Eigen::MatrixXd first_normal_matrix(const ExtrinsicData& ext) {
    const int n = ext.n;
    Eigen::MatrixXd M(ext.q(), n * (n + 1) / 2);
    for (int r = 0; r < ext.q(); ++r) {
        int c = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) M(r, c++) = ext.h[r](i, j);
    }
    return M;
}

inline int count_nonzero(const Eigen::VectorXd& ev, double tol_zero) {
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    int count = 0;
    for (double v : ev)
        if (std::abs(v) > tol_zero * scale) ++count;
    return count;
}

} // namespace detail

inline constexpr double kRankAbsFloor = 1e-12;

/// Numerical rank of the span of h (dimension of the first normal space).
inline int first_normal_rank(const ExtrinsicData& ext, double tol = kDefaultZeroTol) {
    if (ext.q() == 0) return 0;
    const Eigen::MatrixXd M = detail::first_normal_matrix(ext);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= kRankAbsFloor) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * sv(0)) ++rank;
    return rank;
}

/// Unit normal coefficients spanning a rank-one first normal space (the
/// dominant left singular vector), oriented so that its shape operator has
/// non-negative trace.
inline Eigen::VectorXd principal_normal_coefficients(const ExtrinsicData& ext) {
    const Eigen::MatrixXd M = detail::first_normal_matrix(ext);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU);
    Eigen::VectorXd u = svd.matrixU().col(0);
    double tr = 0.0;
    for (int r = 0; r < ext.q(); ++r) tr += u(r) * ext.h[r].trace();
    if (tr < 0.0) u = -u;
    return u;
}

inline Eigen::MatrixXd shape_operator(const ExtrinsicData& ext, const Eigen::VectorXd& coeffs) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ext.n, ext.n);
    for (int r = 0; r < ext.q(); ++r) A += coeffs(r) * ext.h[r];
    return A;
}

/**
 * @brief Max number of nonzero eigenvalues of A_ξ over unit normals ξ.
 *
 * Exact when the first normal space has rank <= 1; otherwise the frame normals
 * plus `samples` random unit combinations drawn from `seed` are checked.
 */
inline int type_number(const ExtrinsicData& ext, int samples = 64, std::uint64_t seed = 0,
                       double tol_zero = kDefaultZeroTol) {
    const int q = ext.q();
    if (q == 0) return 0;
    const int rank = first_normal_rank(ext, tol_zero);
    if (rank == 0) return 0;
    if (rank == 1)
        return detail::count_nonzero(
            symmetric_eigenvalues_desc(shape_operator(ext, principal_normal_coefficients(ext))),
            tol_zero);
    int best = 0;
    for (int r = 0; r < q; ++r)
        best = std::max(best, detail::count_nonzero(symmetric_eigenvalues_desc(ext.h[r]), tol_zero));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd c(q);
        for (int r = 0; r < q; ++r) c(r) = gauss(rng);
        c.normalize();
        best = std::max(best, detail::count_nonzero(symmetric_eigenvalues_desc(shape_operator(ext, c)),
                                                    tol_zero));
    }
    return best;
}

/// Extrinsic data at a chart point plus how it was obtained.
struct PointGeometry {
    std::vector<double> x; // chart point actually used
    Jet2 jet;
    ExtrinsicData ext;
    std::vector<std::string> warnings;
};

/**
 * @brief Jet and extrinsic data at x with the degenerate-metric policy.
 *
 * A metric that fails definiteness by less than kDegenerateRetryMargin (a
 * chart singularity such as a polar axis) is retried at a slightly shifted
 * point with a warning; anything worse is a DegenerateMetricError.
 */
inline PointGeometry analyze_point(const ImmersionSpec& spec, std::span<const double> x) {
    PointGeometry pg;
    pg.x.assign(x.begin(), x.end());
    double shift = 1e-5;
    for (int attempt = 0;; ++attempt) {
        pg.jet = jet2_hyperdual(spec, pg.x);
        Eigen::MatrixXd g(spec.n(), spec.n());
        for (int i = 0; i < spec.n(); ++i)
            for (int j = 0; j < spec.n(); ++j)
                g(i, j) = spec.spaceform().inner(pg.jet.first.col(i), pg.jet.first.col(j));
        if (metric_is_positive_definite(g)) break;
        const double pivot = min_cholesky_pivot(g);
        if (pivot < -kDegenerateRetryMargin || attempt == 3)
            throw DegenerateMetricError("induced metric is not positive definite at the point (min pivot " +
                                        format_real(pivot) + ")");
        std::vector<double> moved(x.begin(), x.end());
        for (int i = 0; i < spec.n(); ++i) {
            const double d = shift * std::max(1.0, std::abs(x[i]));
            moved[i] = x[i] + d <= spec.domain()[i].hi ? x[i] + d : x[i] - d;
        }
        pg.warnings.push_back("near-degenerate metric (min pivot " + format_real(pivot) +
                              "); retried at a point shifted by " + format_real(shift));
        pg.x = std::move(moved);
        shift *= 10.0;
    }
    pg.ext = compute_extrinsic(spec.spaceform(), pg.jet);
    return pg;
}

} // namespace deltaforge
