// deltaforge command-line front end.
//
// Exit codes: 0 all checks pass, 1 verification failures, 2 invalid input.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deltaforge.hpp"

namespace df = deltaforge;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw df::ConfigError("bad integer list '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw df::ConfigError("empty integer list");
    return out;
}

df::ParamMap parse_param_flags(const std::vector<std::string>& flags) {
    df::ParamMap out;
    for (const auto& f : flags) {
        const auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0) throw df::ConfigError("--param expects name=value, got '" + f + "'");
        out[f.substr(0, eq)] = df::evaluate_constant(f.substr(eq + 1));
    }
    return out;
}

int resolve_threads(int flag) {
    if (const char* env = std::getenv("DELTAFORGE_THREADS"); env && *env) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(env, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || env[used] != '\0' || v < 1)
            throw df::ConfigError(std::string("DELTAFORGE_THREADS must be a positive integer, got '") + env + "'");
        return v;
    }
    if (flag < 1) throw df::ConfigError("--threads must be positive");
    return flag;
}

struct SourceFlags {
    std::string family;
    std::string spec_path;
    int n = 0;
    std::optional<int> pad_to;
    std::vector<std::string> params;

    void add(CLI::App* cmd) {
        auto* fam = cmd->add_option("--family", family, "Catalog family id (see `catalog list`)");
        auto* spec = cmd->add_option("--spec", spec_path, "Spec document path");
        fam->excludes(spec);
        cmd->add_option("--n", n, "Intrinsic dimension (catalog families)");
        cmd->add_option("--pad-to", pad_to, "Embed the catalog family into R^m(c) of this dimension");
        cmd->add_option("--param", params, "Parameter override name=value (repeatable)");
    }

    df::SpecSource resolve() const {
        df::SpecSource src;
        if (family.empty() == spec_path.empty()) throw df::ConfigError("give exactly one of --family or --spec");
        const df::ParamMap overrides = parse_param_flags(params);
        if (!family.empty()) {
            src.family = df::parse_catalog_id(family);
            if (n == 0) throw df::ConfigError("--family needs --n");
            src.n = n;
            src.pad_to = pad_to;
        } else {
            auto spec = df::load_spec_file(spec_path);
            if (n != 0 && n != spec.n())
                throw df::ConfigError("--n " + std::to_string(n) + " disagrees with the spec (n=" +
                                      std::to_string(spec.n()) + ")");
            if (pad_to) throw df::ConfigError("--pad-to applies to catalog families only");
            src.n = spec.n();
            src.spec = spec.with_params(overrides);
        }
        return src;
    }

    df::ImmersionSpec build() const {
        const df::SpecSource src = resolve();
        if (src.spec) return *src.spec;
        return df::build_catalog(*src.family, src.n, parse_param_flags(params), src.pad_to);
    }
};

struct JobFlags {
    SourceFlags source;
    std::vector<std::string> partitions;
    std::string points = "grid:3";
    double tol = 1e-6;
    std::uint64_t seed = 0;
    int threads = 1;
    int starts = 32;
    int max_iter = 200;
    std::string out;
    std::string csv;
    bool fd_check = false;
    std::string grid;

    void add(CLI::App* cmd) {
        source.add(cmd);
        cmd->add_option("--partition", partitions, "Partition n1,n2,... (repeatable)")->required();
        cmd->add_option("--points", points, "grid:K | random:C | file:<path>")->capture_default_str();
        cmd->add_option("--tol", tol, "Ideality tolerance on the gap")->capture_default_str();
        cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
        cmd->add_option("--threads", threads, "Worker threads (DELTAFORGE_THREADS overrides)")->capture_default_str();
        cmd->add_option("--starts", starts, "Random optimizer starts per cell")->capture_default_str();
        cmd->add_option("--max-iter", max_iter, "Line searches per optimizer start")->capture_default_str();
        cmd->add_option("--out", out, "Write the JSON report here (default: standard output)");
        cmd->add_option("--emit-csv", csv, "Also write a tidy CSV of the records");
        cmd->add_flag("--fd-check", fd_check, "Cross-check jets against finite differences");
    }

    df::Job job() const {
        df::Job j;
        j.source = source.resolve();
        j.sampling = df::parse_sampling(points);
        for (const auto& p : partitions) j.partitions.push_back(df::validate_partition(j.source.n, parse_int_list(p)));
        const df::ParamMap fixed = parse_param_flags(source.params);
        if (!grid.empty()) {
            j.parameter_grid = df::parse_parameter_grid(grid);
            for (auto& row : j.parameter_grid)
                for (const auto& [k, v] : fixed)
                    if (!row.contains(k)) row[k] = v;
        } else if (j.source.family) {
            df::catalog_params(*j.source.family, fixed); // constraint errors are input errors here
            j.parameter_grid = {fixed};
        }
        if (tol <= 0) throw df::ConfigError("--tol must be positive");
        if (starts < 0 || max_iter < 1) throw df::ConfigError("--starts must be >= 0 and --max-iter >= 1");
        j.tolerances.gap = tol;
        j.seed = seed;
        j.threads = resolve_threads(threads);
        j.verify.starts = starts;
        j.verify.max_iter = max_iter;
        j.verify.fd_check = fd_check;
        return j;
    }
};

int run_verify(const JobFlags& flags) {
    const df::Job job = flags.job();
    const df::VerificationReport rep = df::run_job(job);
    const std::string json = df::report_json(rep);
    if (flags.out.empty()) {
        std::cout << json;
        std::cerr << df::summary_text(rep);
    } else {
        df::write_text_file(flags.out, json);
        std::cout << df::summary_text(rep);
    }
    if (!flags.csv.empty()) df::write_text_file(flags.csv, df::report_csv(rep));
    return rep.summary.all_pass ? kExitPass : kExitFail;
}

int run_coeffs(int n, const std::string& partition) {
    const df::Partition p = df::validate_partition(n, parse_int_list(partition));
    const auto [c, b] = df::chen_coefficients(p);
    std::cout << "partition " << df::to_string(p) << "  n=" << n << "\n";
    std::cout << "c = " << df::format_real(c) << "\n";
    std::cout << "b = " << df::format_real(b) << "\n";
    return kExitPass;
}

int run_catalog_list() {
    for (const auto& info : df::catalog_families()) {
        std::cout << info.name << "  ambient=" << df::to_string(info.ambient) << "  n>=" << info.min_n
                  << "  params:";
        for (const auto& [k, v] : info.defaults) std::cout << " " << k << "=" << df::format_real(v);
        std::cout << "\n";
    }
    return kExitPass;
}

int run_catalog_show(const std::string& name, int n) {
    const auto id = df::parse_catalog_id(name);
    const auto& info = df::catalog_info(id);
    if (n == 0) n = info.min_n;
    const auto spec = df::build_catalog(id, n);
    std::cout << info.name << ": " << info.description << "\n";
    std::cout << "ambient: " << df::to_string(info.ambient) << " m=" << spec.spaceform().m() << " (n=" << n
              << "), requires n >= " << info.min_n << "\n";
    std::cout << "constraint: " << info.constraint << "\n";
    std::cout << "defaults:";
    for (const auto& [k, v] : info.defaults) std::cout << " " << k << "=" << df::format_real(v);
    std::cout << "\n\n" << df::serialize_spec(spec);
    return kExitPass;
}

struct DeltaFlags {
    SourceFlags source;
    std::string point;
    std::string partition;
    int starts = 32;
    int max_iter = 200;
    std::uint64_t seed = 0;
    int threads = 1;
    double tol = 1e-6;
    long oracle = 0;
};

int run_delta(const DeltaFlags& f) {
    const df::ImmersionSpec spec = f.source.build();
    const auto pts = df::parse_point_list(f.point);
    if (pts.size() != 1) throw df::ConfigError("--point expects one point x1,...,xn");
    const df::Partition p = df::validate_partition(spec.n(), parse_int_list(f.partition));
    df::DeltaOptions opts;
    opts.starts = f.starts;
    opts.max_iter = f.max_iter;
    opts.seed = f.seed;
    opts.threads = resolve_threads(f.threads);
    opts.tol = f.tol;
    df::DeltaReport r;
    try {
        r = df::ideality_check(spec, pts[0], p, opts);
    } catch (const df::InequalityViolation& e) {
        std::cerr << "InequalityViolation: " << e.what() << "\n";
        return kExitFail;
    }
    auto line = [](const char* key, double v) { std::cout << key << " = " << df::format_real(v) << "\n"; };
    std::cout << "partition " << df::to_string(p) << "\n";
    line("tau", r.tau);
    line("H_sq", r.H_sq);
    line("best_sum", r.best_sum);
    line("delta_lower", r.delta_lower);
    line("rhs", r.rhs);
    line("gap", r.gap);
    std::cout << "starts = " << r.starts << "  line_searches = " << r.iterations
              << "  best_converged = " << (r.best_converged ? "true" : "false") << "\n";
    for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
    if (f.oracle > 0) {
        const auto pg = df::analyze_point(spec, pts[0]);
        const double best = df::delta_oracle(df::make_curvature(pg.ext), p, f.oracle, f.seed);
        line("oracle_delta_lower", r.tau - best);
    }
    const bool ideal = r.pass(f.tol);
    std::cout << (ideal ? "ideal at this point" : "not ideal at this point") << "\n";
    return ideal ? kExitPass : kExitFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical certification of ideal immersions into space forms"};
    app.require_subcommand(1);

    int coeff_n = 0;
    std::string coeff_part;
    auto* coeffs = app.add_subcommand("coeffs", "Print the constants c(n1..nk) and b(n1..nk)");
    coeffs->add_option("--n", coeff_n, "Intrinsic dimension")->required();
    coeffs->add_option("--partition", coeff_part, "Partition n1,n2,...")->required();

    auto* catalog = app.add_subcommand("catalog", "Catalog of ideal families");
    catalog->require_subcommand(1);
    catalog->add_subcommand("list", "List families");
    std::string show_name;
    int show_n = 0;
    auto* show = catalog->add_subcommand("show", "Show a family's metadata, constraint and default domain");
    show->add_option("family", show_name, "Family id")->required();
    show->add_option("--n", show_n, "Intrinsic dimension (default: smallest allowed)");

    JobFlags verify_flags;
    auto* verify = app.add_subcommand("verify", "Verify ideality at sampled points");
    verify_flags.add(verify);

    JobFlags sweep_flags;
    auto* sweep = app.add_subcommand("sweep", "Verify over a parameter grid");
    sweep_flags.add(sweep);
    sweep->add_option("--grid", sweep_flags.grid, "Parameter grid, e.g. a=0.1:0.9:5,b=1")->required();

    DeltaFlags delta_flags;
    auto* delta = app.add_subcommand("delta", "Estimate the delta invariant at one point");
    delta_flags.source.add(delta);
    delta->add_option("--point", delta_flags.point, "Chart point x1,...,xn")->required();
    delta->add_option("--partition", delta_flags.partition, "Partition n1,n2,...")->required();
    delta->add_option("--starts", delta_flags.starts, "Random optimizer starts")->capture_default_str();
    delta->add_option("--max-iter", delta_flags.max_iter, "Line searches per start")->capture_default_str();
    delta->add_option("--seed", delta_flags.seed, "Random seed")->capture_default_str();
    delta->add_option("--threads", delta_flags.threads, "Worker threads")->capture_default_str();
    delta->add_option("--tol", delta_flags.tol, "Ideality tolerance")->capture_default_str();
    delta->add_option("--oracle", delta_flags.oracle, "Also run the brute-force oracle with this many samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitInvalid;
    }

    try {
        if (*coeffs) return run_coeffs(coeff_n, coeff_part);
        if (*catalog) return *show ? run_catalog_show(show_name, show_n) : run_catalog_list();
        if (*verify) return run_verify(verify_flags);
        if (*sweep) return run_verify(sweep_flags);
        if (*delta) return run_delta(delta_flags);
    } catch (const df::Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}
