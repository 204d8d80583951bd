#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "deltaforge/error.hpp"
#include "deltaforge/expression.hpp"
#include "deltaforge/immersion.hpp"
#include "deltaforge/spaceform.hpp"

namespace deltaforge {

/*
 * Spec document format (UTF-8, '#' starts a comment):
 *
 *   [spaceform] kind=euclidean|sphere|hyperbolic  m=<int>
 *   [domain]    n=<int>  x1=<lo>:<hi> ... xn=<lo>:<hi>
 *   [params]    a=0.6  b=1.0
 *   [map]       u1="sqrt(1-a^2)*x1"  u2="x2" ...
 *
 * Entries may share a line with their section header or follow on later
 * lines. Bounds and parameter values accept constant expressions (pi/2).
 */
namespace detail {

struct Entry {
    std::string key;
    std::string value;
    int line;
    int value_column;
};

struct Section {
    std::string name;
    int line;
    std::vector<Entry> entries;
};

inline std::vector<Section> tokenize_document(std::string_view text) {
    std::vector<Section> sections;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        std::size_t pos = 0;
        auto col = [&] { return static_cast<int>(pos) + 1; };
        auto skip_ws = [&] {
            while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        };
        for (;;) {
            skip_ws();
            if (pos >= line.size() || line[pos] == '#') break;
            if (line[pos] == '[') {
                const std::size_t close = line.find(']', pos);
                if (close == std::string_view::npos)
                    throw ParseError("unterminated section header", line_no, col());
                sections.push_back(
                    {std::string(line.substr(pos + 1, close - pos - 1)), line_no, {}});
                pos = close + 1;
                continue;
            }
            if (sections.empty()) throw ParseError("entry outside of a section", line_no, col());
            const std::size_t key_start = pos;
            while (pos < line.size() && line[pos] != '=' &&
                   !std::isspace(static_cast<unsigned char>(line[pos])))
                ++pos;
            if (pos >= line.size() || line[pos] != '=')
                throw ParseError("expected key=value", line_no, static_cast<int>(key_start) + 1);
            std::string key(line.substr(key_start, pos - key_start));
            if (key.empty()) throw ParseError("empty key", line_no, col());
            ++pos;
            std::string value;
            int value_col = col();
            if (pos < line.size() && line[pos] == '"') {
                const std::size_t close = line.find('"', pos + 1);
                if (close == std::string_view::npos)
                    throw ParseError("unterminated string", line_no, col());
                value = std::string(line.substr(pos + 1, close - pos - 1));
                value_col = col() + 1;
                pos = close + 1;
            } else {
                const std::size_t vstart = pos;
                while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])) &&
                       line[pos] != '#')
                    ++pos;
                value = std::string(line.substr(vstart, pos - vstart));
            }
            sections.back().entries.push_back({std::move(key), std::move(value), line_no, value_col});
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    return sections;
}

inline int parse_int(const Entry& e) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(e.value, &used);
        if (used == e.value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("expected an integer for '" + e.key + "'", e.line, e.value_column);
}

} // namespace detail

/// Parses a spec document into an immersion spec (a user spec, no catalog id).
inline ImmersionSpec parse_spec(std::string_view text) {
    const auto sections = detail::tokenize_document(text);
    auto find = [&](std::string_view name) -> const detail::Section* {
        const detail::Section* found = nullptr;
        for (const auto& s : sections) {
            if (s.name != name) continue;
            if (found) throw ParseError("duplicate section [" + s.name + "]", s.line, 1);
            found = &s;
        }
        return found;
    };
    for (const auto& s : sections)
        if (s.name != "spaceform" && s.name != "domain" && s.name != "params" && s.name != "map")
            throw ParseError("unknown section [" + s.name + "]", s.line, 1);

    const auto* sf_sec = find("spaceform");
    const auto* dom_sec = find("domain");
    const auto* par_sec = find("params");
    const auto* map_sec = find("map");
    if (!sf_sec) throw ParseError("missing [spaceform] section", 1, 1);
    if (!dom_sec) throw ParseError("missing [domain] section", 1, 1);
    if (!map_sec) throw ParseError("missing [map] section", 1, 1);

    std::optional<SpaceKind> kind;
    std::optional<int> m;
    for (const auto& e : sf_sec->entries) {
        if (e.key == "kind") {
            try {
                kind = parse_space_kind(e.value);
            } catch (const ConfigError& err) {
                throw ParseError(err.what(), e.line, e.value_column);
            }
        } else if (e.key == "m") {
            m = detail::parse_int(e);
        } else {
            throw ParseError("unknown key '" + e.key + "' in [spaceform]", e.line, e.value_column);
        }
    }
    if (!kind || !m) throw ConstraintError("[spaceform] needs kind= and m=");
    if (*m < 2) throw ConstraintError("space form dimension m must be at least 2");
    const SpaceForm sf(*kind, *m);

    // Parameters first: bounds may not reference them, map entries may.
    ParamMap params;
    if (par_sec) {
        for (const auto& e : par_sec->entries) {
            if (is_reserved_name(e.key))
                throw ParseError("parameter name '" + e.key + "' is reserved", e.line, 1);
            if (params.contains(e.key))
                throw ParseError("duplicate parameter '" + e.key + "'", e.line, 1);
            params[e.key] = evaluate_constant(e.value, {}, {}, e.line, e.value_column);
        }
    }

    std::optional<int> n;
    std::map<int, Interval> bounds;
    for (const auto& e : dom_sec->entries) {
        if (e.key == "n") {
            n = detail::parse_int(e);
            continue;
        }
        const int k = variable_index(e.key);
        if (k == 0) throw ParseError("unknown key '" + e.key + "' in [domain]", e.line, 1);
        const std::size_t colon = e.value.find(':');
        if (colon == std::string::npos)
            throw ParseError("expected <lo>:<hi> for " + e.key, e.line, e.value_column);
        const double lo = evaluate_constant(std::string_view(e.value).substr(0, colon), {}, {},
                                            e.line, e.value_column);
        const double hi = evaluate_constant(std::string_view(e.value).substr(colon + 1), {}, {},
                                            e.line, e.value_column + static_cast<int>(colon) + 1);
        if (bounds.contains(k)) throw ParseError("duplicate bound for " + e.key, e.line, 1);
        bounds[k] = Interval{lo, hi};
    }
    if (!n) throw ConstraintError("[domain] needs n=");
    if (*n < 1) throw ConstraintError("n must be positive");
    std::vector<Interval> domain;
    for (int k = 1; k <= *n; ++k) {
        auto it = bounds.find(k);
        if (it == bounds.end()) throw ConstraintError("[domain] is missing bounds for x" + std::to_string(k));
        domain.push_back(it->second);
    }
    if (static_cast<int>(bounds.size()) != *n)
        throw ConstraintError("[domain] declares bounds for variables beyond n=" + std::to_string(*n));

    SymbolTable symbols;
    symbols.variables = *n;
    for (const auto& [k, v] : params) symbols.params.push_back(k);

    std::map<int, Expression> coords;
    for (const auto& e : map_sec->entries) {
        if (e.key.size() < 2 || e.key[0] != 'u')
            throw ParseError("map keys must be u1..uN, got '" + e.key + "'", e.line, 1);
        const int k = variable_index("x" + e.key.substr(1));
        if (k == 0) throw ParseError("map keys must be u1..uN, got '" + e.key + "'", e.line, 1);
        if (coords.contains(k)) throw ParseError("duplicate map entry " + e.key, e.line, 1);
        coords.emplace(k, Expression::parse(e.value, symbols, e.line, e.value_column));
    }
    if (static_cast<int>(coords.size()) != sf.flat_dim())
        throw ConstraintError("[map] has " + std::to_string(coords.size()) + " entries; " +
                              std::string(to_string(*kind)) + " m=" + std::to_string(*m) +
                              " needs exactly " + std::to_string(sf.flat_dim()));
    std::vector<Expression> ordered;
    for (int k = 1; k <= sf.flat_dim(); ++k) {
        auto it = coords.find(k);
        if (it == coords.end()) throw ConstraintError("[map] is missing u" + std::to_string(k));
        ordered.push_back(it->second);
    }
    return {sf, *n, std::move(ordered), std::move(params), std::move(domain)};
}

inline ImmersionSpec load_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

/// Writes a spec document; `parse_spec(serialize_spec(s))` evaluates identically to s.
inline std::string serialize_spec(const ImmersionSpec& spec) {
    std::ostringstream out;
    out << "[spaceform]\nkind=" << to_string(spec.spaceform().kind())
        << "\nm=" << spec.spaceform().m() << "\n\n[domain]\nn=" << spec.n() << "\n";
    for (int i = 0; i < spec.n(); ++i)
        out << "x" << i + 1 << "=" << format_real(spec.domain()[i].lo) << ":"
            << format_real(spec.domain()[i].hi) << "\n";
    if (!spec.params().empty()) {
        out << "\n[params]\n";
        for (const auto& [k, v] : spec.params()) out << k << "=" << format_real(v) << "\n";
    }
    out << "\n[map]\n";
    for (std::size_t k = 0; k < spec.coords().size(); ++k)
        out << "u" << k + 1 << "=\"" << spec.coords()[k].to_string() << "\"\n";
    return out.str();
}

} // namespace deltaforge
