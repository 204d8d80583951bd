#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "deltaforge/curvature.hpp"
#include "deltaforge/error.hpp"
#include "deltaforge/extrinsic.hpp"
#include "deltaforge/immersion.hpp"

namespace deltaforge {

/// Element of S(n): 2 <= n_j < n, Σ n_j <= n, stored sorted descending.
struct Partition {
    int n = 0;
    std::vector<int> parts;

    int k() const { return static_cast<int>(parts.size()); }
    int total() const { return std::accumulate(parts.begin(), parts.end(), 0); }
    bool operator==(const Partition&) const = default;
};

inline std::string to_string(const Partition& p) {
    std::string out = "(";
    for (std::size_t j = 0; j < p.parts.size(); ++j) {
        if (j) out += ",";
        out += std::to_string(p.parts[j]);
    }
    return out + ")";
}

inline Partition validate_partition(int n, std::vector<int> parts) {
    if (parts.empty()) throw PartitionError("partition needs at least one part (k >= 1)");
    long sum = 0;
    for (int p : parts) {
        if (p < 2) throw PartitionError("part " + std::to_string(p) + " violates 2 <= n_j");
        if (p >= n)
            throw PartitionError("part " + std::to_string(p) + " violates n_j < n = " + std::to_string(n));
        sum += p;
    }
    if (sum > n)
        throw PartitionError("sum of parts " + std::to_string(sum) + " exceeds n = " + std::to_string(n));
    std::sort(parts.begin(), parts.end(), std::greater<>());
    return {n, std::move(parts)};
}

/// Every element of S(n) in lexicographically descending order.
inline std::vector<Partition> enumerate_partitions(int n) {
    std::vector<Partition> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int max_part, int room) {
        for (int p = std::min(max_part, room); p >= 2; --p) {
            cur.push_back(p);
            out.push_back({n, cur});
            rec(p, room - p);
            cur.pop_back();
        }
    };
    rec(n - 1, n);
    return out;
}

struct InequalityCoefficients {
    double c_coeff;
    double b_coeff;
};

inline InequalityCoefficients chen_coefficients(const Partition& p) {
    const double n = p.n;
    const double k = p.k();
    const double s = p.total();
    double b = n * (n - 1) / 2;
    for (int nj : p.parts) b -= nj * (nj - 1) / 2.0;
    return {n * n * (n + k - 1 - s) / (2 * (n + k - s)), b};
}

inline double chen_rhs(const Partition& p, double H_sq, double c) {
    const auto [cc, bc] = chen_coefficients(p);
    return cc * H_sq + bc * c;
}

/**
 * @brief f(Q) = Σ_j τ(L_j(Q)), L_j spanned by consecutive column blocks of Q.
 *
 * τ(L) uses the trace form of the Gauss equation:
 * τ(L) = Σ_r ½[(tr M_r)² − |M_r|²_F] + c·r(r−1)/2 with M_r = Q_Lᵀ h_r Q_L.
 */
class SubspaceObjective {
public:
    SubspaceObjective(const CurvatureData& cd, const Partition& p) : cd_(&cd), p_(&p) {
        int off = 0;
        block_of_.assign(cd.n, -1);
        for (int j = 0; j < p.k(); ++j) {
            offsets_.push_back(off);
            for (int i = 0; i < p.parts[j]; ++i) block_of_[off + i] = j;
            off += p.parts[j];
        }
    }

    int n() const { return cd_->n; }
    int block_of(int col) const { return block_of_[col]; }

    double operator()(const Eigen::MatrixXd& Q) const {
        double f = 0.0;
        for (int j = 0; j < p_->k(); ++j) {
            const int r = p_->parts[j];
            const auto QL = Q.middleCols(offsets_[j], r);
            f += cd_->c * r * (r - 1) / 2.0;
            for (const auto& hr : cd_->h) {
                const Eigen::MatrixXd M = QL.transpose() * hr * QL;
                const double tr = M.trace();
                f += 0.5 * (tr * tr - M.squaredNorm());
            }
        }
        return f;
    }

    /// Column planes whose rotation can change f: both columns used, in
    /// different blocks, or one used and one in the unused remainder.
    std::vector<std::pair<int, int>> active_planes() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n(); ++i)
            for (int j = i + 1; j < n(); ++j)
                if (block_of_[i] != block_of_[j]) out.emplace_back(i, j);
        return out;
    }

private:
    const CurvatureData* cd_;
    const Partition* p_;
    std::vector<int> offsets_;
    std::vector<int> block_of_;
};

struct DeltaOptions {
    int starts = 32;                       // Haar-random starts
    std::uint64_t seed = 0;
    int max_iter = 200;                    // line searches per start
    double ftol = 1e-12;
    std::size_t max_coordinate_starts = 10000;
    int threads = 1;
    double tol = 1e-6;                     // ideality tolerance
};

struct DeltaReport {
    std::vector<double> point;
    Partition partition;
    double tau = 0.0;
    double best_sum = 0.0;
    double delta_lower = 0.0;
    double rhs = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    double H_sq = 0.0;
    int starts = 0;
    long iterations = 0;       // line searches over all starts
    int converged_starts = 0;
    bool best_converged = false;
    std::uint64_t seed = 0;
    Eigen::MatrixXd best_frame; // columns: blocks L_1..L_k, then the remainder
    std::vector<std::string> warnings;

    bool pass(double tol) const { return gap >= -tol && gap <= tol; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
inline Eigen::MatrixXd haar_orthogonal(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd A(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) A(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (R(j, j) < 0.0) Q.col(j) *= -1.0;
    return Q;
}

inline Eigen::MatrixXd permutation_frame(const std::vector<int>& axes) {
    const int n = static_cast<int>(axes.size());
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    for (int col = 0; col < n; ++col) Q(axes[col], col) = 1.0;
    return Q;
}

/// Number of ways to assign axes to the blocks (residual order irrelevant).
inline double coordinate_assignment_count(const Partition& p) {
    double count = 1.0;
    int left = p.n;
    for (int nj : p.parts) {
        double binom = 1.0;
        for (int i = 0; i < nj; ++i) binom = binom * (left - i) / (i + 1);
        count *= binom;
        left -= nj;
    }
    return count;
}

/// Frames whose blocks are spanned by coordinate axes: every assignment when
/// there are at most `cap`, otherwise `cap` random ones drawn from `seed`.
inline std::vector<Eigen::MatrixXd> coordinate_frames(const Partition& p, std::size_t cap,
                                                      std::uint64_t seed) {
    std::vector<Eigen::MatrixXd> frames;
    const int n = p.n;
    if (coordinate_assignment_count(p) > static_cast<double>(cap)) {
        std::mt19937_64 rng(derive_seed(seed, 2, 0));
        std::vector<int> axes(n);
        for (std::size_t s = 0; s < cap; ++s) {
            std::iota(axes.begin(), axes.end(), 0);
            std::shuffle(axes.begin(), axes.end(), rng);
            frames.push_back(permutation_frame(axes));
        }
        return frames;
    }
    std::vector<int> axes;
    std::vector<bool> used(n, false);
    // Blocks are filled in order; within a block axes increase, so each
    // assignment is produced once.
    std::function<void(int, int, int)> rec = [&](int block, int filled, int min_axis) {
        if (block == p.k()) {
            std::vector<int> full = axes;
            for (int a = 0; a < n; ++a)
                if (!used[a]) full.push_back(a);
            frames.push_back(permutation_frame(full));
            return;
        }
        if (filled == p.parts[block]) {
            rec(block + 1, 0, 0);
            return;
        }
        for (int a = min_axis; a < n; ++a) {
            if (used[a]) continue;
            used[a] = true;
            axes.push_back(a);
            rec(block, filled + 1, a + 1);
            axes.pop_back();
            used[a] = false;
        }
    };
    rec(0, 0, 0);
    return frames;
}

inline void rotate_columns(Eigen::MatrixXd& Q, int i, int j, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const Eigen::VectorXd qi = Q.col(i);
    Q.col(i) = c * qi + s * Q.col(j);
    Q.col(j) = -s * qi + c * Q.col(j);
}

/**
 * φ(θ) = f(Q·G_ij(θ)) is a trigonometric polynomial with frequencies 0, 2, 4
 * (f is a quartic form in the two rotated columns). Eight samples over one
 * period π determine it exactly.
 */
struct PlaneProfile {
    double a0, a1, b1, a2, b2;
    double operator()(double t) const {
        return a0 + a1 * std::cos(2 * t) + b1 * std::sin(2 * t) + a2 * std::cos(4 * t) +
               b2 * std::sin(4 * t);
    }
};

inline PlaneProfile fit_profile(const SubspaceObjective& f, const Eigen::MatrixXd& Q, int i, int j,
                                double f0) {
    constexpr int kSamples = 8;
    double v[kSamples];
    v[0] = f0;
    Eigen::MatrixXd R = Q;
    for (int s = 1; s < kSamples; ++s) {
        R.col(i) = Q.col(i);
        R.col(j) = Q.col(j);
        rotate_columns(R, i, j, s * std::numbers::pi / kSamples);
        v[s] = f(R);
    }
    PlaneProfile p{0, 0, 0, 0, 0};
    for (int s = 0; s < kSamples; ++s) {
        const double psi = 2.0 * std::numbers::pi * s / kSamples; // ψ = 2θ
        p.a0 += v[s];
        p.a1 += v[s] * std::cos(psi);
        p.b1 += v[s] * std::sin(psi);
        p.a2 += v[s] * std::cos(2 * psi);
        p.b2 += v[s] * std::sin(2 * psi);
    }
    p.a0 /= kSamples;
    p.a1 *= 2.0 / kSamples;
    p.b1 *= 2.0 / kSamples;
    p.a2 *= 2.0 / kSamples;
    p.b2 *= 2.0 / kSamples;
    return p;
}

/// Golden-section minimum of φ over one period, bracketed by a coarse grid.
inline double golden_minimize(const PlaneProfile& phi) {
    constexpr int kGrid = 24;
    const double period = std::numbers::pi;
    int best = 0;
    double best_v = phi(0.0);
    for (int s = 1; s < kGrid; ++s) {
        const double v = phi(s * period / kGrid);
        if (v < best_v) {
            best_v = v;
            best = s;
        }
    }
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = (best - 1) * period / kGrid, hi = (best + 1) * period / kGrid;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = phi(x1), f2 = phi(x2);
    while (hi - lo > 1e-11) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = phi(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = phi(x2);
        }
    }
    return 0.5 * (lo + hi);
}

struct LocalResult {
    double value;
    Eigen::MatrixXd Q;
    int line_searches = 0;
    bool converged = false;
};

/**
 * Derivative-free descent in exponential coordinates Q·exp(S): each step is a
 * golden-section line search along an elementary skew direction E_ij − E_ji
 * (a Givens rotation of columns i, j). Planes are visited in a seeded random
 * order per sweep; a sweep that improves f by less than ftol ends the search.
 */
inline LocalResult local_descent(const SubspaceObjective& f, Eigen::MatrixXd Q,
                                 const DeltaOptions& opts, std::uint64_t seed) {
    LocalResult res{f(Q), {}, 0, false};
    auto planes = f.active_planes();
    if (planes.empty()) {
        res.Q = std::move(Q);
        res.converged = true;
        return res;
    }
    std::mt19937_64 rng(seed);
    while (res.line_searches < opts.max_iter) {
        std::shuffle(planes.begin(), planes.end(), rng);
        const double sweep_start = res.value;
        for (const auto& [i, j] : planes) {
            if (res.line_searches >= opts.max_iter) break;
            ++res.line_searches;
            const PlaneProfile phi = fit_profile(f, Q, i, j, res.value);
            const double theta = golden_minimize(phi);
            Eigen::MatrixXd trial = Q;
            rotate_columns(trial, i, j, theta);
            const double v = f(trial);
            if (v < res.value) {
                res.value = v;
                Q = std::move(trial);
            }
        }
        if (sweep_start - res.value < opts.ftol) {
            res.converged = true;
            break;
        }
    }
    // Keep Q numerically orthogonal after many rotations.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
    Eigen::MatrixXd Qo = qr.householderQ() * Eigen::MatrixXd::Identity(f.n(), f.n());
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < f.n(); ++j)
        if (R(j, j) < 0.0) Qo.col(j) *= -1.0;
    const double vo = f(Qo);
    if (vo <= res.value) {
        res.value = vo;
        res.Q = std::move(Qo);
    } else {
        res.Q = std::move(Q);
    }
    return res;
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const std::size_t width = std::min<std::size_t>(std::max(1, threads), count);
    if (width <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (std::size_t t = 0; t < width; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace detail

/**
 * @brief Lower bound on δ(n₁,…,n_k) at a point: τ minus the best Σ τ(L_j)
 * found by multi-start local descent over orthonormal frames.
 *
 * Starts are the identity, the coordinate-block assignments, then
 * `opts.starts` Haar-random frames; start i uses a seed derived from
 * (opts.seed, i) only, so adding starts never raises best_sum.
 */
inline DeltaReport delta_estimate(const CurvatureData& cd, const Partition& p,
                                  const DeltaOptions& opts = {}) {
    if (p.n != cd.n)
        throw DimensionError("partition is for n=" + std::to_string(p.n) + ", point has n=" +
                             std::to_string(cd.n));
    const SubspaceObjective f(cd, p);
    std::vector<Eigen::MatrixXd> frames;
    frames.push_back(Eigen::MatrixXd::Identity(cd.n, cd.n));
    for (auto& Q : detail::coordinate_frames(p, opts.max_coordinate_starts, opts.seed))
        frames.push_back(std::move(Q));
    const std::size_t fixed = frames.size();
    const std::size_t total = fixed + static_cast<std::size_t>(std::max(0, opts.starts));

    std::vector<detail::LocalResult> results(total);
    detail::parallel_for(total, opts.threads, [&](std::size_t s) {
        Eigen::MatrixXd Q0;
        if (s < fixed) {
            Q0 = frames[s];
        } else {
            std::mt19937_64 rng(detail::derive_seed(opts.seed, 1, s - fixed));
            Q0 = detail::haar_orthogonal(cd.n, rng);
        }
        const std::uint64_t order_seed =
            detail::derive_seed(opts.seed, s < fixed ? 3 : 4, s < fixed ? s : s - fixed);
        results[s] = detail::local_descent(f, std::move(Q0), opts, order_seed);
    });

    DeltaReport rep;
    rep.partition = p;
    rep.tau = cd.tau;
    rep.seed = opts.seed;
    rep.starts = static_cast<int>(total);
    std::size_t best = 0;
    for (std::size_t s = 0; s < total; ++s) {
        rep.iterations += results[s].line_searches;
        if (results[s].converged) ++rep.converged_starts;
        if (results[s].value < results[best].value) best = s;
    }
    rep.best_sum = results[best].value;
    rep.best_converged = results[best].converged;
    rep.best_frame = results[best].Q;
    rep.delta_lower = rep.tau - rep.best_sum;
    return rep;
}

namespace detail {

/// Pair-sum evaluation of Σ τ(L_j) through scalar_curvature_subspace.
inline double pair_sum_objective(const CurvatureData& cd, const Partition& p, const Eigen::MatrixXd& Q) {
    double f = 0.0;
    int off = 0;
    for (int nj : p.parts) {
        f += scalar_curvature_subspace(cd, Q.middleCols(off, nj));
        off += nj;
    }
    return f;
}

/// Orthogonal matrix from skew coordinates via the Cayley transform.
inline Eigen::MatrixXd cayley(const Eigen::VectorXd& s, int n) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            A(i, j) = 0.5 * s(k);
            A(j, i) = -0.5 * s(k);
            ++k;
        }
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    return (I - A).partialPivLu().solve(I + A);
}

/// Compass search in Cayley coordinates around Q, re-anchored after each gain.
inline double compass_polish(const std::function<double(const Eigen::MatrixXd&)>& f, Eigen::MatrixXd Q,
                             double value) {
    const int n = static_cast<int>(Q.rows());
    const int d = n * (n - 1) / 2;
    double step = 0.25;
    long evals = 0;
    while (step > 1e-9 && evals < 200000) {
        bool improved = false;
        for (int k = 0; k < d; ++k) {
            for (double sign : {1.0, -1.0}) {
                Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
                s(k) = sign * step;
                const Eigen::MatrixXd trial = Q * cayley(s, n);
                const double v = f(trial);
                ++evals;
                if (v < value) {
                    value = v;
                    Q = trial;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return value;
}

} // namespace detail

/**
 * @brief Brute-force best Σ τ(L_j), independent of delta_estimate.
 *
 * Evaluates the literal pair sum over coordinate-block frames and `samples`
 * Haar-random frames, then compass-polishes the 10 best and every
 * coordinate-block frame (up to 200).
 */
inline double delta_oracle(const CurvatureData& cd, const Partition& p, long samples = 100000,
                           std::uint64_t seed = 0) {
    if (p.n != cd.n) throw DimensionError("partition and point disagree on n");
    auto f = [&](const Eigen::MatrixXd& Q) { return detail::pair_sum_objective(cd, p, Q); };
    std::vector<std::pair<double, Eigen::MatrixXd>> best;
    constexpr std::size_t kKeep = 10;
    auto offer = [&](Eigen::MatrixXd Q) {
        const double v = f(Q);
        if (best.size() == kKeep && v >= best.back().first) return;
        auto it = std::upper_bound(best.begin(), best.end(), v,
                                   [](double a, const auto& e) { return a < e.first; });
        best.insert(it, {v, std::move(Q)});
        if (best.size() > kKeep) best.pop_back();
    };
    const auto coords = detail::coordinate_frames(p, 10000, seed ^ 0x5eedULL);
    for (const auto& Q : coords) offer(Q);
    std::mt19937_64 rng(detail::splitmix64(seed + 0x0ac1eULL));
    for (long s = 0; s < samples; ++s) offer(detail::haar_orthogonal(cd.n, rng));
    double out = best.front().first;
    for (auto& [v, Q] : best) out = std::min(out, detail::compass_polish(f, Q, v));
    // The best raw values can all sit in one basin; coordinate frames seed others.
    constexpr std::size_t kCoordinatePolish = 200;
    for (std::size_t i = 0; i < std::min(coords.size(), kCoordinatePolish); ++i)
        out = std::min(out, detail::compass_polish(f, coords[i], f(coords[i])));
    return out;
}

/// Full pipeline at x: jets, extrinsic data, curvature, δ estimate, inequality RHS.
inline DeltaReport ideality_check(const ImmersionSpec& spec, std::span<const double> x,
                                  const Partition& p, const DeltaOptions& opts = {}) {
    if (p.n != spec.n()) throw DimensionError("partition n does not match the spec");
    const PointGeometry pg = analyze_point(spec, x);
    const CurvatureData cd = make_curvature(pg.ext);
    DeltaReport rep = delta_estimate(cd, p, opts);
    rep.point = pg.x;
    rep.warnings = pg.warnings;
    rep.H_sq = pg.ext.H_sq;
    rep.rhs = chen_rhs(p, rep.H_sq, spec.spaceform().curvature());
    rep.gap = rep.rhs - rep.delta_lower;
    if (rep.gap < -opts.tol)
        throw InequalityViolation("delta_lower exceeds the inequality bound by " + format_real(-rep.gap) +
                                  " for partition " + to_string(p));
    return rep;
}

/// Eigenvalue assignment realizing the block form: blocks[j] holds indices
/// into the spectrum, `residual` the indices forming μ·I.
struct EqualityStructure {
    bool satisfiable = false;
    double mu = 0.0;
    std::vector<std::vector<int>> blocks;
    std::vector<int> residual;
};

inline constexpr double kStructureTol = 1e-6;

/**
 * @brief Searches eigenvector-aligned block forms: eigenvalues are assigned
 * to blocks of sizes n₁..n_k plus a residual block; every block trace and
 * every residual eigenvalue must equal μ within tol·max|λ|.
 */
inline EqualityStructure equality_structure_check(const Eigen::VectorXd& spectrum, const Partition& p,
                                                  double tol = kStructureTol) {
    const int n = static_cast<int>(spectrum.size());
    if (n != p.n) throw DimensionError("spectrum length must equal partition n");
    const double scale = n ? spectrum.cwiseAbs().maxCoeff() : 0.0;
    const double eps = tol * scale;
    EqualityStructure out;
    std::vector<bool> used(n, false);
    std::vector<std::vector<int>> blocks(p.k());
    double mu = 0.0;

    std::function<bool(int, int, int, double)> rec = [&](int block, int min_idx, int filled,
                                                         double trace) -> bool {
        if (block == p.k()) {
            std::vector<int> residual;
            for (int i = 0; i < n; ++i)
                if (!used[i]) {
                    if (std::abs(spectrum(i) - mu) > eps) return false;
                    residual.push_back(i);
                }
            out = {true, mu, blocks, residual};
            return true;
        }
        if (filled == p.parts[block]) {
            if (block == 0) mu = trace;
            else if (std::abs(trace - mu) > eps) return false;
            return rec(block + 1, 0, 0, 0.0);
        }
        // Blocks of equal size are interchangeable; order their first index.
        int start = min_idx;
        if (filled == 0 && block > 0 && p.parts[block] == p.parts[block - 1])
            start = blocks[block - 1].front() + 1;
        for (int i = start; i < n; ++i) {
            if (used[i]) continue;
            used[i] = true;
            blocks[block].push_back(i);
            if (rec(block, i + 1, filled + 1, trace + spectrum(i))) return true;
            blocks[block].pop_back();
            used[i] = false;
        }
        return false;
    };
    rec(0, 0, 0, 0.0);
    return out;
}

/// Structure check on the shape operator spanning the first normal space.
inline EqualityStructure equality_structure_check(const ExtrinsicData& ext, const Partition& p,
                                                  double tol = kStructureTol,
                                                  double zero_tol = kDefaultZeroTol) {
    const int rank = first_normal_rank(ext, zero_tol);
    if (rank >= 2)
        throw UnsupportedError("equality structure check needs a first normal space of rank <= 1");
    Eigen::VectorXd spectrum = Eigen::VectorXd::Zero(ext.n);
    if (rank == 1)
        spectrum = symmetric_eigenvalues_desc(shape_operator(ext, principal_normal_coefficients(ext)));
    return equality_structure_check(spectrum, p, tol);
}

} // namespace deltaforge
