#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deltaforge/catalog.hpp"
#include "deltaforge/curvature.hpp"
#include "deltaforge/delta.hpp"
#include "deltaforge/error.hpp"
#include "deltaforge/extrinsic.hpp"
#include "deltaforge/immersion.hpp"
#include "deltaforge/jet.hpp"
#include "deltaforge/spec_document.hpp"

namespace deltaforge {

inline constexpr const char* kSchemaVersion = "1";

struct Tolerances {
    double gap = 1e-6;
    double lambda_rel = 1e-9;
    double residual = 1e-5;   // gauss and codazzi
    double quadric = 1e-10;
    double metric_match = 1e-11;
    double structure = kStructureTol;
    double zero = kDefaultZeroTol;
    double fd = 1e-5;
};

struct Residuals {
    std::optional<double> gauss;
    std::optional<double> codazzi;
    std::optional<double> quadric;
    std::optional<double> metric_match;
    std::optional<double> fd;
};

struct VerifyOptions {
    int starts = 32;
    int max_iter = 200;
    bool fd_check = false;
};

struct PointRecord {
    ParamMap params;
    Partition partition;
    std::vector<double> x;
    std::vector<double> x_used;
    double tau = 0.0;
    double H_sq = 0.0;
    std::vector<std::vector<double>> eigenvalues;
    int type_number = 0;
    int first_normal_rank = 0;
    std::optional<double> lambda_closed_form;
    std::optional<double> lambda_top;
    bool upper_sheet = true;
    double best_sum = 0.0;
    double delta_lower = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    int starts = 0;
    long line_searches = 0;
    bool converged = false;
    Residuals residuals;
    std::optional<EqualityStructure> structure;
    std::vector<std::string> warnings;
    std::optional<std::string> error_kind;
    std::optional<std::string> error_message;
    bool pass = false;
};

namespace detail {

inline double relative_diff(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

/// Geometry half of verify_point; throws on the first hard error.
inline void verify_point_into(PointRecord& rec, const ImmersionSpec& spec, const Tolerances& tol,
                              std::uint64_t seed, const VerifyOptions& vo) {
    const PointGeometry pg = analyze_point(spec, rec.x);
    const bool retried = !pg.warnings.empty();
    rec.x_used = pg.x;
    rec.warnings = pg.warnings;
    const ExtrinsicData& ext = pg.ext;
    const CurvatureData cd = make_curvature(ext);
    rec.tau = cd.tau;
    rec.H_sq = ext.H_sq;
    for (const auto& ev : shape_spectrum(ext, tol.zero).eigenvalues)
        rec.eigenvalues.emplace_back(ev.data(), ev.data() + ev.size());
    rec.first_normal_rank = first_normal_rank(ext, tol.zero);
    rec.type_number = type_number(ext, 64, seed, tol.zero);

    DeltaOptions dopt;
    dopt.starts = vo.starts;
    dopt.max_iter = vo.max_iter;
    dopt.seed = seed;
    dopt.tol = tol.gap;
    const DeltaReport dr = delta_estimate(cd, rec.partition, dopt);
    rec.best_sum = dr.best_sum;
    rec.delta_lower = dr.delta_lower;
    rec.rhs = chen_rhs(rec.partition, ext.H_sq, spec.spaceform().curvature());
    rec.gap = rec.rhs - rec.delta_lower;
    rec.starts = dr.starts;
    rec.line_searches = dr.iterations;
    rec.converged = dr.best_converged;

    bool ok = rec.gap >= -tol.gap && rec.gap <= tol.gap;
    if (rec.gap < -tol.gap) {
        rec.error_kind = "InequalityViolation";
        rec.error_message = "delta_lower exceeds the inequality bound by " + format_real(-rec.gap);
    }

    if (rec.first_normal_rank <= 1) {
        Eigen::VectorXd spectrum = Eigen::VectorXd::Zero(ext.n);
        if (rec.first_normal_rank == 1) {
            spectrum = symmetric_eigenvalues_desc(shape_operator(ext, principal_normal_coefficients(ext)));
            rec.lambda_top = spectrum(0);
        } else {
            rec.lambda_top = 0.0;
        }
        rec.structure = equality_structure_check(spectrum, rec.partition, tol.structure);
        ok = ok && rec.structure->satisfiable;
    } else {
        rec.warnings.push_back("first normal rank " + std::to_string(rec.first_normal_rank) +
                               ": equality structure and Codazzi checks skipped");
    }

    if (spec.spaceform().curved()) {
        const QuadricResult qr = quadric_check(spec.spaceform(), ext.point);
        rec.residuals.quadric = qr.residual;
        rec.upper_sheet = qr.upper_sheet;
        ok = ok && qr.residual <= tol.quadric && qr.upper_sheet;
    }

    if (retried) {
        rec.warnings.push_back("chart is near-singular here: Gauss and Codazzi residuals skipped");
    } else {
        rec.residuals.gauss = gauss_residual(spec, rec.x_used);
        ok = ok && *rec.residuals.gauss <= tol.residual;
        if (rec.first_normal_rank <= 1) {
            rec.residuals.codazzi = codazzi_residual(spec, rec.x_used);
            ok = ok && *rec.residuals.codazzi <= tol.residual;
        }
    }

    if (spec.family()) {
        const CatalogId id = *spec.family();
        rec.residuals.metric_match = metric_match_residual(spec, rec.x_used);
        ok = ok && *rec.residuals.metric_match <= tol.metric_match;
        rec.lambda_closed_form = closed_form_lambda(id, spec.n(), spec.params(), rec.x_used);
        ok = ok && rec.lambda_top &&
             relative_diff(*rec.lambda_top, std::abs(*rec.lambda_closed_form)) <= tol.lambda_rel;
        ok = ok && rec.type_number <= 2;
    }

    if (vo.fd_check) {
        const Jet2 fd = jet2_finite_difference(spec, rec.x_used).jet;
        double scale = 1.0;
        scale = std::max(scale, pg.jet.first.cwiseAbs().maxCoeff());
        for (const auto& v : pg.jet.hess) scale = std::max(scale, v.cwiseAbs().maxCoeff());
        rec.residuals.fd = pg.jet.max_abs_diff(fd) / scale;
        ok = ok && *rec.residuals.fd <= tol.fd;
    }
    rec.pass = ok && !rec.error_kind;
}

} // namespace detail

/// Every check at one point; errors are captured into the record.
inline PointRecord verify_point(const ImmersionSpec& spec, std::span<const double> x, const Partition& p,
                                const Tolerances& tol = {}, std::uint64_t seed = 0,
                                const VerifyOptions& vo = {}) {
    PointRecord rec;
    rec.params = spec.params();
    rec.partition = p;
    rec.x.assign(x.begin(), x.end());
    try {
        if (p.n != spec.n())
            throw DimensionError("partition is for n=" + std::to_string(p.n) + ", spec has n=" +
                                 std::to_string(spec.n()));
        detail::verify_point_into(rec, spec, tol, seed, vo);
    } catch (const Error& e) {
        rec.error_kind = e.kind();
        rec.error_message = e.what();
        rec.pass = false;
    } catch (const std::exception& e) {
        rec.error_kind = "Error";
        rec.error_message = e.what();
        rec.pass = false;
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Jobs

struct PointSampling {
    enum class Kind { Grid, Random, Explicit };
    Kind kind = Kind::Grid;
    int k = 3;
    int count = 0;
    std::vector<std::vector<double>> points;

    static PointSampling grid(int k) { return {Kind::Grid, k, 0, {}}; }
    static PointSampling random(int count) { return {Kind::Random, 0, count, {}}; }
    static PointSampling list(std::vector<std::vector<double>> pts) {
        return {Kind::Explicit, 0, 0, std::move(pts)};
    }
};

/// Reads one point per line, coordinates separated by commas or spaces; '#' comments.
inline std::vector<std::vector<double>> parse_point_list(std::string_view text) {
    std::vector<std::vector<double>> pts;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<double> p;
        std::string tok;
        while (ls >> tok) p.push_back(evaluate_constant(tok, {}, {}, line_no, 1));
        if (!p.empty()) pts.push_back(std::move(p));
    }
    return pts;
}

inline std::vector<std::vector<double>> read_point_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open point file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_point_list(buf.str());
}

/// grid:K | random:C | file:<path>
inline PointSampling parse_sampling(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("point sampling must be grid:K, random:C or file:<path>");
    const std::string kind = text.substr(0, colon);
    const std::string arg = text.substr(colon + 1);
    auto positive = [&](bool allow_zero) {
        std::size_t used = 0;
        int v = -1;
        try {
            v = std::stoi(arg, &used);
        } catch (const std::exception&) {
        }
        if (used != arg.size() || v < (allow_zero ? 0 : 1))
            throw ConfigError("bad count in point sampling '" + text + "'");
        return v;
    };
    if (kind == "grid") return PointSampling::grid(positive(false));
    if (kind == "random") return PointSampling::random(positive(true));
    if (kind == "file") return PointSampling::list(read_point_file(arg));
    throw ConfigError("unknown point sampling '" + kind + "'");
}

inline constexpr double kGridMargin = 0.01; // fraction of each interval kept clear

inline std::vector<std::vector<double>> sample_points(const PointSampling& s,
                                                      const std::vector<Interval>& domain,
                                                      std::uint64_t seed) {
    const int n = static_cast<int>(domain.size());
    std::vector<std::vector<double>> pts;
    auto inner = [&](int i) {
        const double w = domain[i].hi - domain[i].lo;
        return std::pair{domain[i].lo + kGridMargin * w, domain[i].hi - kGridMargin * w};
    };
    switch (s.kind) {
    case PointSampling::Kind::Explicit:
        return s.points;
    case PointSampling::Kind::Random: {
        std::mt19937_64 rng(detail::derive_seed(seed, 7, 0));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int c = 0; c < s.count; ++c) {
            std::vector<double> p(n);
            for (int i = 0; i < n; ++i) {
                const auto [lo, hi] = inner(i);
                p[i] = lo + (hi - lo) * u(rng);
            }
            pts.push_back(std::move(p));
        }
        return pts;
    }
    case PointSampling::Kind::Grid: {
        long total = 1;
        for (int i = 0; i < n; ++i) {
            total *= s.k;
            if (total > 10'000'000) throw ConfigError("grid has too many points");
        }
        std::vector<int> idx(n, 0);
        for (long c = 0; c < total; ++c) {
            std::vector<double> p(n);
            for (int i = 0; i < n; ++i) {
                const auto [lo, hi] = inner(i);
                p[i] = s.k == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx[i] / (s.k - 1);
            }
            pts.push_back(std::move(p));
            for (int i = n - 1; i >= 0; --i) {
                if (++idx[i] < s.k) break;
                idx[i] = 0;
            }
        }
        return pts;
    }
    }
    return pts;
}

/// "a=0.1:0.9:5,b=1" → cartesian product of linspaces / single values, in
/// the order given (last name varies fastest).
inline std::vector<ParamMap> parse_parameter_grid(const std::string& text) {
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("grid entry '" + item + "' needs name=values");
        const std::string name = item.substr(0, eq);
        std::vector<std::string> fields;
        std::istringstream fs(item.substr(eq + 1));
        std::string f;
        while (std::getline(fs, f, ':')) fields.push_back(f);
        std::vector<double> values;
        try {
            if (fields.size() == 1) {
                values.push_back(evaluate_constant(fields[0]));
            } else if (fields.size() == 3) {
                const double lo = evaluate_constant(fields[0]);
                const double hi = evaluate_constant(fields[1]);
                const int count = std::stoi(fields[2]);
                if (count < 1) throw ConfigError("grid count must be positive");
                for (int i = 0; i < count; ++i)
                    values.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
            } else {
                throw ConfigError("grid entry '" + item + "' must be name=v or name=lo:hi:count");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("bad grid entry '" + item + "': " + e.what());
        }
        for (const auto& a : axes)
            if (a.first == name) throw ConfigError("parameter '" + name + "' repeated in grid");
        axes.emplace_back(name, std::move(values));
    }
    std::vector<ParamMap> grid{ParamMap{}};
    for (const auto& [name, values] : axes) {
        std::vector<ParamMap> next;
        for (const auto& base : grid)
            for (double v : values) {
                ParamMap m = base;
                m[name] = v;
                next.push_back(std::move(m));
            }
        grid = std::move(next);
    }
    return grid;
}

struct SpecSource {
    std::optional<CatalogId> family;
    int n = 0;
    std::optional<int> pad_to;
    std::optional<ImmersionSpec> spec; // user spec document
};

struct Job {
    SpecSource source;
    PointSampling sampling;
    std::vector<Partition> partitions;
    std::vector<ParamMap> parameter_grid; // overrides per cell row; empty = one row of defaults
    Tolerances tolerances;
    std::uint64_t seed = 0;
    int threads = 1;
    VerifyOptions verify;
};

struct ReportSummary {
    std::size_t points = 0;
    std::size_t records = 0;
    std::size_t failures = 0;
    double max_gap = 0.0;
    double max_residual = 0.0;
    bool all_pass = true;
};

struct VerificationReport {
    std::string schema_version = kSchemaVersion;
    std::optional<std::string> family;
    std::optional<std::string> spec_hash;
    int n = 0;
    ParamMap params; // defaults before grid overrides
    SpaceKind space_kind = SpaceKind::Euclidean;
    int m = 0;
    std::vector<Partition> partitions;
    std::vector<ParamMap> parameter_grid;
    std::vector<PointRecord> records;
    ReportSummary summary;
    std::uint64_t seed = 0;
    Tolerances tolerances;
    std::vector<std::string> warnings;
};

inline std::string fnv1a64_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline ReportSummary summarize(const std::vector<PointRecord>& records, std::size_t points) {
    ReportSummary s;
    s.points = points;
    s.records = records.size();
    for (const auto& r : records) {
        if (!r.pass) {
            ++s.failures;
            s.all_pass = false;
        }
        if (r.error_kind && *r.error_kind != "InequalityViolation") continue;
        s.max_gap = std::max(s.max_gap, std::abs(r.gap));
        for (const auto& v : {r.residuals.gauss, r.residuals.codazzi, r.residuals.quadric,
                              r.residuals.metric_match})
            if (v) s.max_residual = std::max(s.max_residual, *v);
    }
    return s;
}

/**
 * @brief Evaluates every (parameter row, point, partition) cell.
 *
 * Cells run on a pool of `job.threads` workers (DELTAFORGE_THREADS applies at
 * the CLI); each cell's result depends only on its inputs and the job seed,
 * and records are stored in cell order.
 */
inline VerificationReport run_job(const Job& job) {
    if (job.partitions.empty()) throw ConfigError("job needs at least one partition");
    if (job.source.family.has_value() == job.source.spec.has_value())
        throw ConfigError("job needs exactly one of a catalog family or a spec");

    VerificationReport rep;
    rep.seed = job.seed;
    rep.tolerances = job.tolerances;
    rep.partitions = job.partitions;
    rep.parameter_grid = job.parameter_grid.empty() ? std::vector<ParamMap>{ParamMap{}} : job.parameter_grid;

    std::vector<Interval> domain;
    if (job.source.family) {
        const CatalogId id = *job.source.family;
        const auto& info = catalog_info(id);
        if (job.source.n < info.min_n)
            throw ConfigError(std::string(info.name) + " requires n >= " + std::to_string(info.min_n));
        rep.family = std::string(info.name);
        rep.n = job.source.n;
        rep.params = info.defaults;
        rep.space_kind = info.ambient;
        rep.m = job.source.pad_to.value_or(job.source.n + 1);
        domain = detail::default_domain(id, job.source.n);
    } else {
        const ImmersionSpec& s = *job.source.spec;
        rep.spec_hash = "fnv1a64:" + fnv1a64_hex(serialize_spec(s));
        rep.n = s.n();
        rep.params = s.params();
        rep.space_kind = s.spaceform().kind();
        rep.m = s.spaceform().m();
        domain = s.domain();
    }
    for (const auto& p : job.partitions)
        if (p.n != rep.n) throw ConfigError("partition " + to_string(p) + " is not for n=" + std::to_string(rep.n));

    const auto points = sample_points(job.sampling, domain, job.seed);
    for (const auto& p : points)
        if (static_cast<int>(p.size()) != rep.n)
            throw ConfigError("sample point with " + std::to_string(p.size()) + " coordinates; expected " +
                              std::to_string(rep.n));
    if (points.empty()) rep.warnings.push_back("no sample points: the report is vacuous");

    // One spec per parameter row; rows whose parameters are rejected become
    // failed cells carrying the error.
    struct Row {
        std::optional<ImmersionSpec> spec;
        ParamMap params;
        std::string error_kind, error_message;
    };
    std::vector<Row> rows;
    for (const auto& overrides : rep.parameter_grid) {
        Row row;
        try {
            if (job.source.family)
                row.spec = build_catalog(*job.source.family, job.source.n, overrides, job.source.pad_to);
            else
                row.spec = job.source.spec->with_params(overrides);
            row.params = row.spec->params();
        } catch (const ConstraintError& e) {
            row.error_kind = e.kind();
            row.error_message = e.what();
            row.params = rep.params;
            for (const auto& [k, v] : overrides) row.params[k] = v;
        }
        rows.push_back(std::move(row));
    }

    const std::size_t per_row = points.size() * job.partitions.size();
    const std::size_t cells = rows.size() * per_row;
    rep.records.resize(cells);
    detail::parallel_for(cells, job.threads, [&](std::size_t c) {
        const Row& row = rows[c / per_row];
        const std::size_t rest = c % per_row;
        const auto& x = points[rest / job.partitions.size()];
        const Partition& p = job.partitions[rest % job.partitions.size()];
        if (!row.spec) {
            PointRecord rec;
            rec.params = row.params;
            rec.partition = p;
            rec.x = x;
            rec.error_kind = row.error_kind;
            rec.error_message = row.error_message;
            rep.records[c] = std::move(rec);
            return;
        }
        rep.records[c] = verify_point(*row.spec, x, p, job.tolerances, job.seed, job.verify);
    });
    rep.summary = summarize(rep.records, points.size());
    return rep;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline void write_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

inline void write_canonical(std::string& out, const nlohmann::json& j, int depth) {
    auto indent = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) { // std::map: sorted keys
            if (!first) out += ",\n";
            first = false;
            indent(depth + 1);
            out += nlohmann::json(it.key()).dump();
            out += ": ";
            write_canonical(out, it.value(), depth + 1);
        }
        out += "\n";
        indent(depth);
        out += "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        const bool flat = std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_primitive(); });
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                write_canonical(out, j[i], depth + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            indent(depth + 1);
            write_canonical(out, j[i], depth + 1);
        }
        out += "\n";
        indent(depth);
        out += "]";
        return;
    }
    case nlohmann::json::value_t::number_float:
        write_number(out, j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json params_json(const ParamMap& p) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

} // namespace detail

/// Serializes a JSON value with sorted keys, %.17g floats and LF newlines.
inline std::string canonical_json(const nlohmann::json& j) {
    std::string out;
    detail::write_canonical(out, j, 0);
    out += "\n";
    return out;
}

inline nlohmann::json to_json(const PointRecord& r) {
    using nlohmann::json;
    json j;
    j["params"] = detail::params_json(r.params);
    j["partition"] = r.partition.parts;
    j["x"] = r.x;
    j["x_used"] = r.x_used.empty() ? json(nullptr) : json(r.x_used);
    j["tau"] = r.tau;
    j["H_sq"] = r.H_sq;
    j["eigenvalues"] = r.eigenvalues;
    j["type_number"] = r.type_number;
    j["first_normal_rank"] = r.first_normal_rank;
    j["lambda_closed_form"] = detail::optional_number(r.lambda_closed_form);
    j["lambda_top"] = detail::optional_number(r.lambda_top);
    j["best_sum"] = r.best_sum;
    j["delta_lower"] = r.delta_lower;
    j["rhs"] = r.rhs;
    j["gap"] = r.gap;
    j["optimizer"] = {{"starts", r.starts}, {"line_searches", r.line_searches}, {"converged", r.converged}};
    j["residuals"] = {{"gauss", detail::optional_number(r.residuals.gauss)},
                      {"codazzi", detail::optional_number(r.residuals.codazzi)},
                      {"quadric", detail::optional_number(r.residuals.quadric)},
                      {"metric_match", detail::optional_number(r.residuals.metric_match)},
                      {"fd", detail::optional_number(r.residuals.fd)}};
    if (r.residuals.quadric) j["upper_sheet"] = r.upper_sheet;
    if (r.structure)
        j["equality_structure"] = {{"satisfiable", r.structure->satisfiable},
                                   {"mu", r.structure->mu},
                                   {"blocks", r.structure->blocks},
                                   {"residual", r.structure->residual}};
    else
        j["equality_structure"] = nullptr;
    j["warnings"] = r.warnings;
    if (r.error_kind)
        j["error"] = {{"kind", *r.error_kind}, {"message", r.error_message.value_or("")}};
    else
        j["error"] = nullptr;
    j["pass"] = r.pass;
    return j;
}

inline nlohmann::json to_json(const Tolerances& t) {
    return {{"gap", t.gap},           {"lambda_rel", t.lambda_rel},     {"residual", t.residual},
            {"quadric", t.quadric},   {"metric_match", t.metric_match}, {"structure", t.structure},
            {"zero", t.zero},         {"fd", t.fd}};
}

inline nlohmann::json to_json(const VerificationReport& rep) {
    using nlohmann::json;
    json j;
    j["schema_version"] = rep.schema_version;
    j["spec"] = {{"family", rep.family ? json(*rep.family) : json(nullptr)},
                 {"hash", rep.spec_hash ? json(*rep.spec_hash) : json(nullptr)},
                 {"n", rep.n},
                 {"params", detail::params_json(rep.params)},
                 {"spaceform", {{"kind", std::string(to_string(rep.space_kind))}, {"m", rep.m}}}};
    json parts = json::array();
    for (const auto& p : rep.partitions) parts.push_back(p.parts);
    j["partitions"] = parts;
    json grid = json::array();
    for (const auto& g : rep.parameter_grid) grid.push_back(detail::params_json(g));
    j["parameter_grid"] = grid;
    json recs = json::array();
    for (const auto& r : rep.records) recs.push_back(to_json(r));
    j["records"] = recs;
    j["summary"] = {{"points", rep.summary.points},     {"records", rep.summary.records},
                    {"failures", rep.summary.failures}, {"max_gap", rep.summary.max_gap},
                    {"max_residual", rep.summary.max_residual}, {"all_pass", rep.summary.all_pass}};
    j["seed"] = rep.seed;
    j["tolerances"] = to_json(rep.tolerances);
    j["warnings"] = rep.warnings;
    return j;
}

inline std::string report_json(const VerificationReport& rep) { return canonical_json(to_json(rep)); }

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline void emit_report(const VerificationReport& rep, const std::string& path) {
    write_text_file(path, report_json(rep));
}

/// Tidy CSV: one row per record with params, x, gap, lambda and residuals.
inline std::string report_csv(const VerificationReport& rep) {
    std::vector<std::string> names;
    for (const auto& [k, v] : rep.params) names.push_back(k);
    for (const auto& r : rep.records)
        for (const auto& [k, v] : r.params)
            if (std::find(names.begin(), names.end(), k) == names.end()) names.push_back(k);
    std::sort(names.begin(), names.end());

    auto num = [](double v) {
        std::string s;
        detail::write_number(s, v);
        return s == "null" ? std::string() : s;
    };
    auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };

    std::string out;
    for (const auto& k : names) out += k + ",";
    out += "partition";
    for (int i = 1; i <= rep.n; ++i) out += ",x" + std::to_string(i);
    out += ",gap,lambda_top,lambda_closed_form,gauss,codazzi,quadric,metric_match,error,pass\n";
    for (const auto& r : rep.records) {
        for (const auto& k : names) {
            auto it = r.params.find(k);
            out += (it == r.params.end() ? std::string() : num(it->second)) + ",";
        }
        std::string part;
        for (std::size_t i = 0; i < r.partition.parts.size(); ++i)
            part += (i ? " " : "") + std::to_string(r.partition.parts[i]);
        out += part;
        for (int i = 0; i < rep.n; ++i) out += "," + (i < static_cast<int>(r.x.size()) ? num(r.x[i]) : "");
        out += "," + (r.error_kind && *r.error_kind != "InequalityViolation" ? std::string() : num(r.gap));
        out += "," + opt(r.lambda_top) + "," + opt(r.lambda_closed_form);
        out += "," + opt(r.residuals.gauss) + "," + opt(r.residuals.codazzi) + "," + opt(r.residuals.quadric) +
               "," + opt(r.residuals.metric_match);
        out += "," + r.error_kind.value_or("");
        out += std::string(",") + (r.pass ? "true" : "false") + "\n";
    }
    return out;
}

/// One-paragraph human summary printed next to the JSON report.
inline std::string summary_text(const VerificationReport& rep) {
    std::ostringstream out;
    out << "source: " << (rep.family ? *rep.family : rep.spec_hash.value_or("?")) << "  n=" << rep.n
        << "  " << to_string(rep.space_kind) << " m=" << rep.m << "\n";
    out << "records: " << rep.summary.records << "  points: " << rep.summary.points
        << "  failures: " << rep.summary.failures << "\n";
    out << "max |gap|: " << format_real(rep.summary.max_gap)
        << "  max residual: " << format_real(rep.summary.max_residual) << "\n";
    std::map<std::string, int> errors;
    for (const auto& r : rep.records)
        if (r.error_kind) ++errors[*r.error_kind];
    for (const auto& [k, c] : errors) out << "errors: " << k << " x" << c << "\n";
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
    out << "all_pass: " << (rep.summary.all_pass ? "true" : "false") << "\n";
    return out.str();
}

} // namespace deltaforge
