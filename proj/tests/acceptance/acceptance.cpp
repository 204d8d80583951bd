// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "deltaforge.hpp"

using namespace deltaforge;
namespace fs = std::filesystem;

namespace {

constexpr double kGapTol = 1e-6;
constexpr double kLambdaRel = 1e-9;
constexpr double kSafety = 1e-9;

// Smallest gap seen by criteria 1-4, folded into criterion 5.
double g_min_gap = std::numeric_limits<double>::infinity();
std::size_t g_gap_count = 0;

struct Outcome {
    bool ok = true;
    std::ostringstream detail;
    int failures = 0;

    void fail(const std::string& what) {
        ok = false;
        if (failures++ < 5) detail << "\n    " << what;
    }
};

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return v;
}

std::string fmt(const std::vector<double>& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + format_real(x[i]);
    return s + ")";
}

VerifyOptions verify_opts() {
    VerifyOptions vo;
    vo.starts = 32;
    return vo;
}

void note_gap(double gap) {
    g_min_gap = std::min(g_min_gap, gap);
    ++g_gap_count;
}

// Gap and λ checks shared by the ideality criteria.
void check_ideal(Outcome& out, const PointRecord& r, const std::string& label) {
    if (r.error_kind) {
        out.fail(label + ": " + *r.error_kind + " " + r.error_message.value_or(""));
        return;
    }
    note_gap(r.gap);
    if (!(r.gap <= kGapTol)) out.fail(label + ": gap " + format_real(r.gap));
    if (!r.lambda_closed_form || !r.lambda_top) {
        out.fail(label + ": missing lambda");
    } else {
        const double rel = std::abs(*r.lambda_top - *r.lambda_closed_form) / std::abs(*r.lambda_closed_form);
        if (!(rel <= kLambdaRel)) out.fail(label + ": lambda rel error " + format_real(rel));
    }
}

void criterion1(Outcome& out) {
    std::size_t cells = 0;
    double worst_gap = 0, worst_lambda = 0;
    for (int n : {3, 4, 5}) {
        std::vector<Partition> parts;
        if (n == 3) parts = {validate_partition(3, {2})};
        if (n == 4) parts = {validate_partition(4, {2, 2}), validate_partition(4, {3})};
        if (n == 5) parts = {validate_partition(5, {3, 2}), validate_partition(5, {4})};
        for (double a : {0.3, 0.6, 0.9}) {
            const auto spec = build_catalog(CatalogId::EuclidT1, n, {{"a", a}});
            for (double x1 : linspace(1, 3, 5))
                for (double xs : linspace(-1, 1, 5)) {
                    std::vector<double> x(n, 0.3);
                    x[0] = x1;
                    x[n - 2] = xs;
                    x[n - 1] = 0.4;
                    for (const auto& p : parts) {
                        const auto r = verify_point(spec, x, p, {}, 0, verify_opts());
                        check_ideal(out, r, "n=" + std::to_string(n) + " a=" + format_real(a) + " x=" + fmt(x) +
                                                " " + to_string(p));
                        ++cells;
                        if (!r.error_kind) worst_gap = std::max(worst_gap, std::abs(r.gap));
                        if (r.lambda_top && r.lambda_closed_form)
                            worst_lambda = std::max(worst_lambda, std::abs(*r.lambda_top / *r.lambda_closed_form - 1));
                    }
                }
        }
    }
    // Spot value: a=0.6, x1=2, n=4 gives λ = 2/3 and δ(2,2) = 4/9.
    const auto spec = build_catalog(CatalogId::EuclidT1, 4, {{"a", 0.6}});
    const std::vector<double> x{2, 0.3, 0.5, 0.4};
    const auto p = validate_partition(4, {2, 2});
    const auto r = verify_point(spec, x, p, {}, 0, verify_opts());
    if (!r.lambda_top || std::abs(*r.lambda_top - 2.0 / 3.0) > 1e-9) out.fail("spot lambda != 2/3");
    if (std::abs(r.delta_lower - 4.0 / 9.0) > 1e-8) out.fail("spot delta_lower " + format_real(r.delta_lower));
    const auto pg = analyze_point(spec, x);
    const auto cd = make_curvature(pg.ext);
    const double oracle = cd.tau - delta_oracle(cd, p, 100000, 1);
    if (std::abs(oracle - 4.0 / 9.0) > 1e-6) out.fail("spot oracle delta " + format_real(oracle));
    out.detail << cells << " cells, max |gap| " << format_real(worst_gap) << ", max lambda rel "
               << format_real(worst_lambda) << ", spot delta " << format_real(r.delta_lower) << " oracle "
               << format_real(oracle);
}

void criterion2(Outcome& out) {
    std::size_t cells = 0;
    double worst_q = 0;
    const auto p = validate_partition(4, {2, 2});
    // x1 avoids the chart singularity at π/2.
    const std::vector<double> x1s{0.4, 0.9, 1.3, 1.9, 2.6};
    for (double a : {0.3, 0.6, 0.9}) {
        const auto spec = build_catalog(CatalogId::SphereT2, 4, {{"a", a}});
        for (double x1 : x1s)
            for (double x3 : linspace(-1, 1, 5)) {
                const std::vector<double> x{x1, 0.7, x3, -0.5};
                const std::string label = "a=" + format_real(a) + " x=" + fmt(x);
                const auto q = quadric_check(spec.spaceform(), spec.position(x));
                worst_q = std::max(worst_q, q.residual);
                if (!(q.residual <= 1e-12)) out.fail(label + ": quadric " + format_real(q.residual));
                check_ideal(out, verify_point(spec, x, p, {}, 0, verify_opts()), label);
                ++cells;
            }
    }
    const auto spec = build_catalog(CatalogId::SphereT2, 4, {{"a", 0.6}});
    const auto r = verify_point(spec, std::vector<double>{std::numbers::pi / 2, 0.7, 0.2, -0.5}, p, {}, 0,
                                verify_opts());
    if (!r.lambda_top || std::abs(*r.lambda_top - 4.0 / 3.0) > 1e-8) out.fail("spot lambda != 4/3");
    if (std::abs(r.delta_lower - 52.0 / 9.0) > 1e-6) out.fail("spot delta_lower " + format_real(r.delta_lower));
    if (std::abs(r.rhs - 52.0 / 9.0) > 1e-6) out.fail("spot rhs " + format_real(r.rhs));
    if (!r.error_kind) note_gap(r.gap);
    out.detail << cells << " cells, max quadric " << format_real(worst_q) << ", spot delta "
               << format_real(r.delta_lower) << " (equator point retried: " << (r.warnings.empty() ? "no" : "yes")
               << ")";
}

void criterion3(Outcome& out) {
    struct Case {
        CatalogId id;
        ParamMap params;
        double lambda0;
    };
    const std::vector<Case> cases{{CatalogId::HypA, {{"a", 0}, {"b", 1}}, std::sqrt(2.0)},
                                  {CatalogId::HypB, {{"a", 0}, {"b", 1}}, 1.0},
                                  {CatalogId::HypC, {{"a", 0}, {"b", std::sqrt(2.0)}}, 1 / std::sqrt(2.0)}};
    const auto p = validate_partition(4, {2, 2});
    std::size_t cells = 0;
    double worst_q = 0;
    for (const auto& c : cases) {
        const auto spec = build_catalog(c.id, 4, c.params);
        std::mt19937_64 rng(detail::derive_seed(2024, static_cast<std::uint64_t>(c.id), 0));
        std::uniform_real_distribution<double> u(-1, 1);
        for (int t = 0; t < 25; ++t) {
            std::vector<double> x(4);
            for (double& v : x) v = u(rng);
            const std::string label = std::string(to_string(c.id)) + " x=" + fmt(x);
            const Eigen::VectorXd pos = spec.position(x);
            const auto q = quadric_check(spec.spaceform(), pos);
            worst_q = std::max(worst_q, q.residual);
            if (!(q.residual <= 1e-10) || !(pos(0) > 0)) out.fail(label + ": off the upper quadric sheet");
            check_ideal(out, verify_point(spec, x, p, {}, 0, verify_opts()), label);
            ++cells;
        }
        const std::vector<double> zero(4, 0.0);
        const auto r0 = verify_point(spec, zero, p, {}, 0, verify_opts());
        if (!r0.lambda_top || std::abs(*r0.lambda_top - c.lambda0) > 1e-9 * c.lambda0)
            out.fail(std::string(to_string(c.id)) + ": lambda at 0");
        if (!r0.error_kind) note_gap(r0.gap);
        if (c.id == CatalogId::HypA) {
            if (std::abs(r0.delta_lower + 2) > 1e-8) out.fail("HYP_A spot delta " + format_real(r0.delta_lower));
            out.detail << "HYP_A spot delta " << format_real(r0.delta_lower) << ", ";
        }
    }
    out.detail << cells << " cells, max quadric " << format_real(worst_q);
}

ImmersionSpec parse_user(const std::string& text) { return parse_spec(text); }

std::string unit_s4_doc() {
    return "[spaceform] kind=euclidean m=5\n[domain] n=4 x1=-1:1 x2=-1:1 x3=-1:1 x4=-1:1\n[map]\n"
           "u1=\"cos(x1)*cos(x2)*cos(x3)*cos(x4)\"\nu2=\"cos(x1)*cos(x2)*cos(x3)*sin(x4)\"\n"
           "u3=\"cos(x1)*cos(x2)*sin(x3)\"\nu4=\"cos(x1)*sin(x2)\"\nu5=\"sin(x1)\"\n";
}

void criterion4(Outcome& out) {
    const auto spec = parse_user(unit_s4_doc());
    const auto p = validate_partition(4, {2});
    const std::vector<double> x{0.2, 0.3, -0.1, 0.5};
    const auto r = verify_point(spec, x, p, {}, 0, verify_opts());
    if (r.error_kind) out.fail(*r.error_kind);
    note_gap(r.gap);
    if (std::abs(r.gap - 1.0 / 3.0) > 1e-6) out.fail("gap " + format_real(r.gap));
    if (r.pass) out.fail("round S^4 reported ideal");
    const auto pg = analyze_point(spec, x);
    const auto cd = make_curvature(pg.ext);
    const double oracle = cd.tau - delta_oracle(cd, p, 100000, 2);
    const double oracle_gap = chen_rhs(p, pg.ext.H_sq, 0) - oracle;
    if (std::abs(oracle_gap - 1.0 / 3.0) > 1e-6) out.fail("oracle gap " + format_real(oracle_gap));
    bool rejected = true;
    for (double mu : {1.0, -0.25, 3.5, 1e-3}) {
        const auto s = equality_structure_check(Eigen::Vector4d::Constant(mu), p);
        rejected = rejected && !s.satisfiable;
    }
    if (!rejected) out.fail("structure check accepted (mu,mu,mu,mu)");
    if (!r.structure || r.structure->satisfiable) out.fail("structure check on S^4 accepted");
    out.detail << "gap " << format_real(r.gap) << ", oracle gap " << format_real(oracle_gap)
               << ", (mu,mu,mu,mu) rejected";
}

// Random low-degree coordinate functions: v_i = x_i + a polynomial/trig perturbation.
std::string random_term(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> var(1, n), kind(0, 4);
    std::uniform_real_distribution<double> coef(-0.8, 0.8);
    auto x = [&] { return "x" + std::to_string(var(rng)); };
    auto c = [&] { return format_real(std::round(coef(rng) * 1000) / 1000); };
    switch (kind(rng)) {
    case 0: return c() + "*" + x() + "^2";
    case 1: return c() + "*" + x() + "*" + x();
    case 2: return c() + "*sin(" + x() + ")";
    case 3: return c() + "*cos(" + x() + ")*" + x();
    default: return c() + "*" + x() + "^3";
    }
}

std::string random_poly(std::mt19937_64& rng, int n, int terms) {
    std::string s;
    for (int t = 0; t < terms; ++t) s += (t ? " + " : "") + random_term(rng, n);
    return s;
}

// Euclidean graphs, normalized maps into S^m and hyperboloid lifts into H^m.
ImmersionSpec random_user_spec(std::mt19937_64& rng, int n, int kind) {
    const int extra = 1 + static_cast<int>(rng() % 2);
    const int m = n + extra;
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i) + " + " + random_poly(rng, n, 1));
    for (int e = 0; e < extra; ++e) v.push_back(random_poly(rng, n, 2));
    std::ostringstream doc;
    std::vector<std::string> coords;
    if (kind == 0) {
        doc << "[spaceform] kind=euclidean m=" << m << "\n";
        coords = v;
    } else {
        std::string norm2 = "1";
        for (const auto& e : v) norm2 += " + (" + e + ")^2";
        if (kind == 1) {
            doc << "[spaceform] kind=sphere m=" << m << "\n";
            coords.push_back("1/sqrt(" + norm2 + ")");
            for (const auto& e : v) coords.push_back("(" + e + ")/sqrt(" + norm2 + ")");
        } else {
            doc << "[spaceform] kind=hyperbolic m=" << m << "\n";
            coords.push_back("sqrt(" + norm2 + ")");
            coords.insert(coords.end(), v.begin(), v.end());
        }
    }
    doc << "[domain] n=" << n;
    for (int i = 1; i <= n; ++i) doc << " x" << i << "=-0.6:0.6";
    doc << "\n[map]\n";
    for (std::size_t i = 0; i < coords.size(); ++i) doc << "u" << i + 1 << "=\"" << coords[i] << "\"\n";
    return parse_spec(doc.str());
}

void criterion5(Outcome& out) {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double min_gap = std::numeric_limits<double>::infinity();
    std::size_t checks = 0;
    int skipped = 0;
    for (int s = 0; s < 200; ++s) {
        const int n = 3 + s % 2;
        const auto spec = random_user_spec(rng, n, s % 3);
        std::vector<double> x(n);
        for (double& v : x) v = u(rng);
        for (const auto& p : enumerate_partitions(n)) {
            DeltaOptions o;
            o.starts = 16;
            o.seed = static_cast<std::uint64_t>(s);
            o.tol = kSafety;
            try {
                const auto r = ideality_check(spec, x, p, o);
                min_gap = std::min(min_gap, r.gap);
                ++checks;
            } catch (const InequalityViolation& e) {
                out.fail("spec " + std::to_string(s) + " " + to_string(p) + ": " + e.what());
            } catch (const Error& e) {
                ++skipped;
                if (skipped <= 3) out.detail << "[skip spec " << s << ": " << e.kind() << "] ";
            }
        }
    }
    if (skipped > 0) out.fail(std::to_string(skipped) + " random cases raised errors");
    if (!(g_min_gap >= -kSafety)) out.fail("criteria 1-4 min gap " + format_real(g_min_gap));
    out.detail << checks << " random checks, min gap " << format_real(min_gap) << "; " << g_gap_count
               << " gaps from criteria 1-4, min " << format_real(g_min_gap);
}

void criterion6(Outcome& out) {
    std::mt19937_64 rng(66);
    double worst_g = 0, worst_c = 0, worst_m = 0;
    for (const auto& info : catalog_families()) {
        for (int n : {4, 5}) {
            const auto spec = build_catalog(info.id, n);
            int done = 0;
            while (done < 10) {
                std::vector<double> x(n);
                for (int i = 0; i < n; ++i) {
                    const auto& iv = spec.domain()[i];
                    const double w = iv.hi - iv.lo;
                    std::uniform_real_distribution<double> d(iv.lo + 0.05 * w, iv.hi - 0.05 * w);
                    x[i] = d(rng);
                }
                if (info.id == CatalogId::SphereT2 && std::abs(std::cos(x[0])) < 0.05) continue;
                ++done;
                const std::string label = std::string(info.name) + " n=" + std::to_string(n) + " x=" + fmt(x);
                try {
                    const double g = gauss_residual(spec, x);
                    const double c = codazzi_residual(spec, x);
                    const double m = metric_match_residual(spec, x);
                    worst_g = std::max(worst_g, g);
                    worst_c = std::max(worst_c, c);
                    worst_m = std::max(worst_m, m);
                    if (!(g <= 1e-5)) out.fail(label + ": gauss " + format_real(g));
                    if (!(c <= 1e-5)) out.fail(label + ": codazzi " + format_real(c));
                    if (!(m <= 1e-11)) out.fail(label + ": metric " + format_real(m));
                } catch (const Error& e) {
                    out.fail(label + ": " + e.kind() + " " + e.what());
                }
            }
        }
    }
    double worst_gamma = 0;
    for (int n : {3, 4, 5}) {
        const ParamMap p{{"a", 0.6}};
        const MetricFn ge = [&](std::span<const double> y) { return closed_form_metric(CatalogId::EuclidT1, n, p, y); };
        const MetricFn gs = [&](std::span<const double> y) { return closed_form_metric(CatalogId::SphereT2, n, p, y); };
        for (double x1 : {0.8, 1.1, 2.0, 2.7}) {
            std::vector<double> x(n, 0.3);
            x[0] = x1;
            const double e = std::abs(christoffels_from_metric(ge, x)[n - 2](0, n - 2) - 1 / x1);
            worst_gamma = std::max(worst_gamma, e);
            if (!(e <= 1e-7)) out.fail("Gamma EUCLID_T1 x1=" + format_real(x1) + " err " + format_real(e));
            const double s = std::abs(christoffels_from_metric(gs, x)[n - 2](0, n - 2) - 1 / std::tan(x1));
            worst_gamma = std::max(worst_gamma, s);
            if (!(s <= 1e-7)) out.fail("Gamma SPHERE_T2 x1=" + format_real(x1) + " err " + format_real(s));
        }
    }
    out.detail << "max gauss " << format_real(worst_g) << ", codazzi " << format_real(worst_c) << ", metric "
               << format_real(worst_m) << ", Christoffel " << format_real(worst_gamma);
}

void criterion7(Outcome& out) {
    std::mt19937_64 rng(77);
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
        const int n = 3 + t % 3;
        std::optional<ImmersionSpec> spec;
        std::vector<double> x(n);
        if (t % 2 == 0 && n >= 4) {
            const auto& fams = catalog_families();
            const auto& info = fams[(t / 2) % fams.size()];
            spec = build_catalog(info.id, n);
            for (int i = 0; i < n; ++i) {
                const auto& iv = spec->domain()[i];
                const double w = iv.hi - iv.lo;
                std::uniform_real_distribution<double> d(iv.lo + 0.1 * w, iv.hi - 0.1 * w);
                x[i] = d(rng);
            }
        } else {
            spec = random_user_spec(rng, n, t % 3);
            std::uniform_real_distribution<double> d(-0.5, 0.5);
            for (double& v : x) v = d(rng);
        }
        const auto parts = enumerate_partitions(n);
        const auto& p = parts[rng() % parts.size()];
        const auto pg = analyze_point(*spec, x);
        const auto cd = make_curvature(pg.ext);
        DeltaOptions o;
        o.seed = static_cast<std::uint64_t>(t);
        const double est = delta_estimate(cd, p, o).delta_lower;
        const double orc = cd.tau - delta_oracle(cd, p, 100000, static_cast<std::uint64_t>(t));
        const double diff = std::abs(est - orc);
        worst = std::max(worst, diff);
        if (!(diff <= 1e-4))
            out.fail("case " + std::to_string(t) + " n=" + std::to_string(n) + " " + to_string(p) + ": estimate " +
                     format_real(est) + " oracle " + format_real(orc));
    }
    out.detail << "50 cases, max |estimate - oracle| " << format_real(worst);
}

int run_cli(const std::string& args) {
    const std::string cmd = "\"" DELTAFORGE_CLI_PATH "\" " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion8(Outcome& out) {
    const fs::path dir = fs::temp_directory_path() / "deltaforge_acceptance";
    fs::create_directories(dir);
    const std::vector<std::string> jobs{
        "verify --family SPHERE_T2 --n 4 --partition 2,2 --partition 2 --points random:8 --seed 9",
        "verify --family HYP_A --n 4 --param b=1.5 --partition 2,2 --points grid:2 --seed 4",
        "sweep --family EUCLID_T1 --n 4 --partition 2,2 --points random:3 --grid a=0.3:0.9:3 --seed 1"};
    std::size_t bytes = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        std::string first;
        for (int threads : {1, 4, 8}) {
            for (int rep = 0; rep < 2; ++rep) {
                const fs::path file = dir / ("r" + std::to_string(j) + "_" + std::to_string(threads) + "_" +
                                             std::to_string(rep) + ".json");
                const int code = run_cli(jobs[j] + " --threads " + std::to_string(threads) + " --out " + file.string());
                if (code != 0 && code != 1) out.fail("job " + std::to_string(j) + " exit " + std::to_string(code));
                const std::string text = slurp(file);
                if (text.empty()) out.fail("job " + std::to_string(j) + " wrote nothing");
                if (first.empty()) {
                    first = text;
                    bytes += text.size();
                } else if (text != first) {
                    out.fail("job " + std::to_string(j) + " differs at threads=" + std::to_string(threads));
                }
            }
        }
    }
    fs::remove_all(dir);
    out.detail << jobs.size() << " jobs x threads {1,4,8} x 2 runs byte-identical (" << bytes << " bytes)";
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"EUCLID_T1 ideality", criterion1},
        {"SPHERE_T2 ideality", criterion2},
        {"HYP_A/B/C ideality", criterion3},
        {"round S^4 negative control", criterion4},
        {"inequality safety", criterion5},
        {"structure-equation residuals", criterion6},
        {"optimizer/oracle agreement", criterion7},
        {"determinism across threads", criterion8}};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(out);
        } catch (const std::exception& e) {
            out.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!out.ok) ++failed;
        char head[160];
        std::snprintf(head, sizeof head, "criterion %zu %s  %-30s [%.1f s]  ", i + 1, out.ok ? "PASS" : "FAIL",
                      criteria[i].first.c_str(), secs);
        std::cout << head << out.detail.str() << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failed ? 1 : 0;
}
