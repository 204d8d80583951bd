#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "deltaforge/error.hpp"
#include "deltaforge/expression.hpp"
#include "deltaforge/immersion.hpp"
#include "deltaforge/spaceform.hpp"

namespace deltaforge {

/// Static facts about one classified family of non-minimal ideal immersions
/// with type number <= 2.
struct CatalogInfo {
    CatalogId id;
    std::string_view name;
    std::string_view description;
    SpaceKind ambient;
    int min_n;
    std::string_view constraint;
    ParamMap defaults;
};

inline const std::array<CatalogInfo, 5>& catalog_families() {
    static const std::array<CatalogInfo, 5> families{{
        {CatalogId::EuclidT1, "EUCLID_T1",
         "Warped product E^{n-2} x_f S^2 in E^{n+1}, f = a*x1", SpaceKind::Euclidean, 3, "0<a<1",
         {{"a", 0.6}}},
        {CatalogId::SphereT2, "SPHERE_T2",
         "Warped product S^{n-2} x_f S^2 in S^{n+1}(1), f = a*sin(x1)", SpaceKind::Sphere, 3,
         "0<a<1", {{"a", 0.6}}},
        {CatalogId::HypA, "HYP_A",
         "Warped product H^{n-2} x_f S^2 in H^{n+1}(-1)", SpaceKind::Hyperbolic, 4, "a^2<1+b^2",
         {{"a", 0.0}, {"b", 1.0}}},
        {CatalogId::HypB, "HYP_B",
         "Warped product H^{n-2} x_f E^2 in H^{n+1}(-1)", SpaceKind::Hyperbolic, 4, "a^2<b^2",
         {{"a", 0.0}, {"b", 1.0}}},
        {CatalogId::HypC, "HYP_C",
         "Warped product H^{n-2} x_f H^2 in H^{n+1}(-1)", SpaceKind::Hyperbolic, 4, "1+a^2<b^2",
         {{"a", 0.0}, {"b", std::numbers::sqrt2}}},
    }};
    return families;
}

inline const CatalogInfo& catalog_info(CatalogId id) {
    for (const auto& f : catalog_families())
        if (f.id == id) return f;
    throw ConfigError("unknown catalog family");
}

inline std::string_view to_string(CatalogId id) { return catalog_info(id).name; }

inline CatalogId parse_catalog_id(std::string_view name) {
    for (const auto& f : catalog_families())
        if (f.name == name) return f.id;
    throw ConfigError("unknown catalog family '" + std::string(name) + "'");
}

inline bool is_hyperbolic_family(CatalogId id) {
    return id == CatalogId::HypA || id == CatalogId::HypB || id == CatalogId::HypC;
}

namespace detail {

inline std::string var(int k) { return "x" + std::to_string(k); }

inline std::string call(std::string_view f, int k) {
    return std::string(f) + "(" + var(k) + ")";
}

/// f(x_lo)*...*f(x_hi); empty string when lo > hi.
inline std::string product(std::string_view f, int lo, int hi) {
    std::string out;
    for (int j = lo; j <= hi; ++j) {
        if (!out.empty()) out += "*";
        out += call(f, j);
    }
    return out;
}

inline std::string times(const std::string& lhs, const std::string& rhs) {
    if (lhs.empty()) return rhs;
    if (rhs.empty()) return lhs;
    return lhs + "*" + rhs;
}

inline ParamMap resolve_params(const CatalogInfo& info, const ParamMap& given) {
    ParamMap out = info.defaults;
    for (const auto& [k, v] : given) {
        if (!out.contains(k))
            throw ConfigError("family " + std::string(info.name) + " has no parameter '" + k + "'");
        out[k] = v;
    }
    return out;
}

inline void check_constraint(CatalogId id, const ParamMap& p) {
    const double a = p.at("a");
    bool ok = true;
    switch (id) {
    case CatalogId::EuclidT1:
    case CatalogId::SphereT2: ok = a > 0.0 && a < 1.0; break;
    case CatalogId::HypA: ok = a * a < 1.0 + p.at("b") * p.at("b"); break;
    case CatalogId::HypB: ok = a * a < p.at("b") * p.at("b"); break;
    case CatalogId::HypC: ok = 1.0 + a * a < p.at("b") * p.at("b"); break;
    }
    if (!ok) {
        std::string vals = "a=" + format_real(a);
        if (p.contains("b")) vals += ", b=" + format_real(p.at("b"));
        throw ConstraintError(std::string(to_string(id)) + " requires " +
                              std::string(catalog_info(id).constraint) + " (" + vals + ")");
    }
}

inline std::vector<std::string> family_coordinates(CatalogId id, int n) {
    std::vector<std::string> u;
    const int nm1 = n - 1;
    const int nm2 = n - 2;
    switch (id) {
    case CatalogId::EuclidT1:
        u.push_back("sqrt(1 - a^2)*x1");
        for (int k = 2; k <= nm2; ++k) u.push_back(var(k));
        u.push_back("a*x1*" + call("sin", nm1));
        u.push_back("a*x1*" + call("cos", nm1) + "*" + call("sin", n));
        u.push_back("a*x1*" + call("cos", nm1) + "*" + call("cos", n));
        break;
    case CatalogId::SphereT2:
        // S^{n-2} in polar form, first coordinate scaled by sqrt(1 - a^2).
        u.push_back("sqrt(1 - a^2)*sin(x1)");
        for (int k = 2; k <= nm2; ++k) u.push_back(times(product("cos", 1, k - 1), call("sin", k)));
        u.push_back(product("cos", 1, nm2));
        u.push_back("a*sin(x1)*" + call("sin", nm1));
        u.push_back("a*sin(x1)*" + call("cos", nm1) + "*" + call("sin", n));
        u.push_back("a*sin(x1)*" + call("cos", nm1) + "*" + call("cos", n));
        break;
    case CatalogId::HypA:
    case CatalogId::HypB:
    case CatalogId::HypC: {
        const std::string P = product("cosh", 1, n - 3);
        const std::string s = call("sinh", nm2);
        const std::string c = call("cosh", nm2);
        const std::string f = times("(a*" + s + " + b*" + c + ")", P);
        std::vector<std::string> chain;
        for (int k = 1; k <= n - 3; ++k) chain.push_back(times(call("sinh", k), product("cosh", 1, k - 1)));
        if (id == CatalogId::HypA) {
            u.push_back(times("(a*b*" + s + " + (1 + b^2)*" + c + ")/sqrt(1 + b^2)", P));
            u.insert(u.end(), chain.begin(), chain.end());
            u.push_back(times("sqrt(1 - a^2 + b^2)/sqrt(1 + b^2)*" + s, P));
            u.push_back(f + "*" + call("cos", nm1) + "*" + call("cos", n));
            u.push_back(f + "*" + call("cos", nm1) + "*" + call("sin", n));
            u.push_back(f + "*" + call("sin", nm1));
        } else if (id == CatalogId::HypB) {
            const std::string r2 = "(" + var(nm1) + "^2 + " + var(n) + "^2)";
            u.push_back(times("(a*(b^4 - 4 + 4*b^2*" + r2 + ")*" + s + " + b*(b^4 + 4 + 4*b^2*" + r2 +
                                  ")*" + c + ")/(4*b^3)",
                              P));
            u.push_back(times("(a*(b^4 + 4 - 4*b^2*" + r2 + ")*" + s + " + b*(b^4 - 4 - 4*b^2*" + r2 +
                                  ")*" + c + ")/(4*b^3)",
                              P));
            u.insert(u.end(), chain.begin(), chain.end());
            u.push_back(times("sqrt(b^2 - a^2)/b*" + s, P));
            u.push_back(f + "*" + var(nm1));
            u.push_back(f + "*" + var(n));
        } else {
            u.push_back(f + "*" + call("cosh", nm1) + "*" + call("cosh", n));
            u.push_back(f + "*" + call("cosh", nm1) + "*" + call("sinh", n));
            u.push_back(f + "*" + call("sinh", nm1));
            u.insert(u.end(), chain.begin(), chain.end());
            u.push_back(times("sqrt(b^2 - a^2 - 1)/sqrt(1 + a^2)", product("cosh", 1, nm2)));
            u.push_back(times("(a*b*" + c + " + (1 + a^2)*" + s + ")/sqrt(1 + a^2)", P));
        }
        break;
    }
    }
    return u;
}

inline std::vector<Interval> default_domain(CatalogId id, int n) {
    constexpr double pi = std::numbers::pi;
    std::vector<Interval> d(n, Interval{-1.5, 1.5});
    switch (id) {
    case CatalogId::EuclidT1:
        d[0] = {0.5, 3.0};
        for (int k = 2; k <= n - 2; ++k) d[k - 1] = {-3.0, 3.0};
        d[n - 2] = {-1.2, 1.2};
        d[n - 1] = {-pi, pi};
        break;
    case CatalogId::SphereT2:
        d[0] = {0.3, pi - 0.3};
        for (int k = 2; k <= n - 3; ++k) d[k - 1] = {-1.2, 1.2};
        if (n >= 4) d[n - 3] = {-pi, pi};
        d[n - 2] = {-1.2, 1.2};
        d[n - 1] = {-pi, pi};
        break;
    default: break;
    }
    return d;
}

inline void check_n(CatalogId id, int n) {
    const auto& info = catalog_info(id);
    if (n < info.min_n)
        throw RangeError(std::string(info.name) + " requires n >= " + std::to_string(info.min_n));
}

} // namespace detail

inline ParamMap catalog_params(CatalogId id, const ParamMap& given) {
    auto p = detail::resolve_params(catalog_info(id), given);
    detail::check_constraint(id, p);
    return p;
}

/**
 * @brief Builds the closed-form immersion of a catalog family.
 *
 * Trailing zero coordinates are dropped (effective codimension one); pass
 * `pad_to` = m to embed into a larger space form with constant-zero
 * coordinates appended.
 */
inline ImmersionSpec build_catalog(CatalogId id, int n, const ParamMap& given = {},
                                   std::optional<int> pad_to = std::nullopt) {
    detail::check_n(id, n);
    const ParamMap params = catalog_params(id, given);
    const auto& info = catalog_info(id);
    const int natural_m = n + 1;
    const int m = pad_to.value_or(natural_m);
    if (m < natural_m)
        throw RangeError("pad_to must be at least " + std::to_string(natural_m));

    SymbolTable symbols;
    symbols.variables = n;
    for (const auto& [k, v] : params) symbols.params.push_back(k);

    std::vector<Expression> coords;
    for (const auto& text : detail::family_coordinates(id, n))
        coords.push_back(Expression::parse(text, symbols));
    const SpaceForm sf(info.ambient, m);
    while (static_cast<int>(coords.size()) < sf.flat_dim())
        coords.push_back(Expression::parse("0", symbols));
    return {sf, n, std::move(coords), params, detail::default_domain(id, n), id};
}

namespace detail {

struct WarpData {
    Eigen::VectorXd base_diag; // metric of the first factor, n-2 entries
    double f = 0.0;            // warping function
    double fiber_second = 0.0; // coefficient of dx_n^2 inside the fibre metric
};

inline WarpData warp(CatalogId id, int n, const ParamMap& p, std::span<const double> x) {
    WarpData w;
    w.base_diag = Eigen::VectorXd::Ones(n - 2);
    const double a = p.at("a");
    const double xn1 = x[n - 2];
    switch (id) {
    case CatalogId::EuclidT1:
        w.f = a * x[0];
        w.fiber_second = std::cos(xn1) * std::cos(xn1);
        break;
    case CatalogId::SphereT2: {
        double prod = 1.0;
        for (int k = 0; k < n - 2; ++k) {
            w.base_diag(k) = prod;
            prod *= std::cos(x[k]) * std::cos(x[k]);
        }
        w.f = a * std::sin(x[0]);
        w.fiber_second = std::cos(xn1) * std::cos(xn1);
        break;
    }
    default: {
        const double b = p.at("b");
        double prod = 1.0;
        double P = 1.0;
        for (int k = 0; k < n - 2; ++k) {
            w.base_diag(k) = prod;
            prod *= std::cosh(x[k]) * std::cosh(x[k]);
            if (k < n - 3) P *= std::cosh(x[k]);
        }
        w.f = (a * std::sinh(x[n - 3]) + b * std::cosh(x[n - 3])) * P;
        w.fiber_second = id == CatalogId::HypA   ? std::cos(xn1) * std::cos(xn1)
                         : id == CatalogId::HypB ? 1.0
                                                 : std::cosh(xn1) * std::cosh(xn1);
        break;
    }
    }
    return w;
}

} // namespace detail

/// Diagonal warped-product metric g_1 + f^2 g_2 of the family at x.
inline Eigen::MatrixXd closed_form_metric(CatalogId id, int n, const ParamMap& given,
                                          std::span<const double> x) {
    detail::check_n(id, n);
    const ParamMap p = catalog_params(id, given);
    if (static_cast<int>(x.size()) != n) throw DimensionError("chart point has wrong dimension");
    const auto w = detail::warp(id, n, p, x);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    g.diagonal().head(n - 2) = w.base_diag;
    g(n - 2, n - 2) = w.f * w.f;
    g(n - 1, n - 1) = w.f * w.f * w.fiber_second;
    return g;
}

/// The nonzero (double) shape-operator eigenvalue of the family at x.
inline double closed_form_lambda(CatalogId id, int n, const ParamMap& given,
                                 std::span<const double> x) {
    detail::check_n(id, n);
    const ParamMap p = catalog_params(id, given);
    if (static_cast<int>(x.size()) != n) throw DimensionError("chart point has wrong dimension");
    const double a = p.at("a");
    switch (id) {
    case CatalogId::EuclidT1:
        if (x[0] == 0.0) throw SingularPointError("x1 = 0 is singular for EUCLID_T1");
        return std::sqrt(1.0 - a * a) / (a * x[0]);
    case CatalogId::SphereT2: {
        const double s = std::sin(x[0]);
        if (std::abs(s) < 1e-300) throw SingularPointError("sin x1 = 0 is singular for SPHERE_T2");
        return std::sqrt(1.0 - a * a) / (a * s);
    }
    default: {
        const double b = p.at("b");
        const double sh = std::sinh(x[n - 3]);
        const double ch = std::cosh(x[n - 3]);
        const double denom = a * sh + b * ch;
        if (std::abs(denom) <= 1e-14 * (std::abs(a * sh) + std::abs(b * ch)))
            throw SingularPointError("a*sinh + b*cosh vanishes at x" + std::to_string(n - 2));
        double sech = 1.0;
        for (int k = 0; k < n - 3; ++k) sech /= std::cosh(x[k]);
        const double num = id == CatalogId::HypA   ? 1.0 - a * a + b * b
                           : id == CatalogId::HypB ? b * b - a * a
                                                   : b * b - a * a - 1.0;
        return std::sqrt(num) / denom * sech;
    }
    }
}

} // namespace deltaforge
