#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "deltaforge/error.hpp"
#include "deltaforge/expression.hpp"
#include "deltaforge/spaceform.hpp"

namespace deltaforge {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v, double slack = 1e-12) const {
        return v >= lo - slack && v <= hi + slack;
    }
    double width() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

enum class CatalogId { EuclidT1, SphereT2, HypA, HypB, HypC };

/// Parameter name -> value, ordered by name (expression slots follow this order).
using ParamMap = std::map<std::string, double>;

/**
 * @brief A parametric immersion x ↦ L(x) into the flat model of a space form.
 *
 * Coordinates are expressions in x1..xn and the named parameters. Specs are
 * immutable after construction; `evaluate` is thread-safe.
 */
class ImmersionSpec {
public:
    ImmersionSpec(SpaceForm sf, int n, std::vector<Expression> coords, ParamMap params,
                  std::vector<Interval> domain, std::optional<CatalogId> family = std::nullopt)
        : sf_(sf), n_(n), coords_(std::move(coords)), params_(std::move(params)),
          domain_(std::move(domain)), family_(family) {
        if (n_ < 1) throw RangeError("intrinsic dimension must be positive");
        if (n_ > sf_.m())
            throw ConstraintError("intrinsic dimension " + std::to_string(n_) +
                                  " exceeds space form dimension " + std::to_string(sf_.m()));
        if (static_cast<int>(coords_.size()) != sf_.flat_dim())
            throw ConstraintError("map has " + std::to_string(coords_.size()) +
                                  " coordinates but the flat model has dimension " +
                                  std::to_string(sf_.flat_dim()));
        if (static_cast<int>(domain_.size()) != n_)
            throw ConstraintError("domain box must have one interval per chart variable");
        for (const auto& iv : domain_)
            if (!(iv.lo <= iv.hi)) throw ConstraintError("domain interval with lo > hi");
        for (const auto& [name, v] : params_) {
            param_values_.push_back(v);
            param_names_.push_back(name);
        }
        for (const auto& c : coords_)
            if (!c.parameter_names().empty() && c.parameter_names() != param_names_)
                throw ConstraintError("coordinate expression bound against a different parameter set");
    }

    const SpaceForm& spaceform() const { return sf_; }
    int n() const { return n_; }
    int flat_dim() const { return sf_.flat_dim(); }
    const std::vector<Expression>& coords() const { return coords_; }
    const ParamMap& params() const { return params_; }
    const std::vector<std::string>& param_names() const { return param_names_; }
    std::span<const double> param_values() const { return param_values_; }
    const std::vector<Interval>& domain() const { return domain_; }
    const std::optional<CatalogId>& family() const { return family_; }

    double param(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("spec has no parameter '" + name + "'");
        return it->second;
    }

    bool contains(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != n_) return false;
        for (int i = 0; i < n_; ++i)
            if (!domain_[i].contains(x[i])) return false;
        return true;
    }

    void require_inside(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != n_)
            throw DimensionError("chart point has " + std::to_string(x.size()) +
                                 " coordinates, expected " + std::to_string(n_));
        for (int i = 0; i < n_; ++i)
            if (!domain_[i].contains(x[i]))
                throw DomainError("x" + std::to_string(i + 1) + " = " + format_real(x[i]) +
                                  " outside [" + format_real(domain_[i].lo) + ", " +
                                  format_real(domain_[i].hi) + "]");
    }

    template <typename T>
    void evaluate(std::span<const T> x, std::span<T> out) const {
        for (std::size_t k = 0; k < coords_.size(); ++k)
            out[k] = coords_[k].template evaluate<T>(x, param_values_);
    }

    Eigen::VectorXd position(std::span<const double> x) const {
        Eigen::VectorXd p(flat_dim());
        evaluate<double>(x, std::span<double>(p.data(), p.size()));
        return p;
    }

    /// Same map with a replaced domain box.
    ImmersionSpec with_domain(std::vector<Interval> domain) const {
        return {sf_, n_, coords_, params_, std::move(domain), family_};
    }

    /// Same map with some parameter values replaced; names must already exist.
    ImmersionSpec with_params(const ParamMap& overrides) const {
        ParamMap p = params_;
        for (const auto& [name, v] : overrides) {
            auto it = p.find(name);
            if (it == p.end()) throw ConfigError("spec has no parameter '" + name + "'");
            it->second = v;
        }
        return {sf_, n_, coords_, std::move(p), domain_, family_};
    }

private:
    SpaceForm sf_;
    int n_;
    std::vector<Expression> coords_;
    ParamMap params_;
    std::vector<double> param_values_;
    std::vector<std::string> param_names_;
    std::vector<Interval> domain_;
    std::optional<CatalogId> family_;
};

} // namespace deltaforge
