#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deltaforge/error.hpp"
#include "deltaforge/hyperdual.hpp"

namespace deltaforge {

enum class Func { Sin, Cos, Tan, Sinh, Cosh, Tanh, Sqrt, Exp, Log };

inline constexpr std::array<std::pair<std::string_view, Func>, 9> kFunctions{{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tan", Func::Tan},
    {"sinh", Func::Sinh},
    {"cosh", Func::Cosh},
    {"tanh", Func::Tanh},
    {"sqrt", Func::Sqrt},
    {"exp", Func::Exp},
    {"log", Func::Log},
}};

inline std::optional<Func> lookup_function(std::string_view name) {
    for (const auto& [key, f] : kFunctions)
        if (key == name) return f;
    return std::nullopt;
}

inline std::string_view function_name(Func f) {
    for (const auto& [key, g] : kFunctions)
        if (g == f) return key;
    return "?";
}

/// Parses "x<k>" with 1 <= k; returns k, or 0 if `name` is not of that form.
inline int variable_index(std::string_view name) {
    if (name.size() < 2 || name[0] != 'x') return 0;
    int k = 0;
    for (char ch : name.substr(1)) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) return 0;
        k = k * 10 + (ch - '0');
        if (k > 1'000'000) return 0;
    }
    if (name[1] == '0') return 0;
    return k;
}

/// Names visible to an expression: chart variables x1..xn and named parameters
/// (parameter slot = position in `params`).
struct SymbolTable {
    int variables = 0;
    std::vector<std::string> params;

    std::optional<int> param_slot(std::string_view name) const {
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i] == name) return static_cast<int>(i);
        return std::nullopt;
    }
};

inline bool is_reserved_name(std::string_view name) {
    return name == "pi" || lookup_function(name).has_value() || variable_index(name) > 0;
}

/// Formats a double so that parsing it back yields the same value.
/// Shortest %g form that reads back as the same double.
inline std::string format_real(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/**
 * @brief Parsed scalar expression over chart variables and parameters.
 *
 * Grammar (operators are left-associative except '^'):
 *
 *   expr   := term (('+'|'-') term)*
 *   term   := factor (('*'|'/') factor)*
 *   factor := unary ('^' factor)?
 *   unary  := '-' unary | atom
 *   atom   := number | 'pi' | ident | func '(' expr ')' | '(' expr ')'
 *
 * Note that unary minus binds tighter than '^', so "-x^2" is (-x)^2.
 */
class Expression {
public:
    enum class Kind { Number, Variable, Parameter, Neg, Add, Sub, Mul, Div, Pow, Call };

    struct Node {
        Kind kind;
        double number = 0.0; // Number
        int slot = -1;       // Variable (0-based) or Parameter slot
        Func func = Func::Sin;
        int lhs = -1;
        int rhs = -1;
    };

    Expression() = default;

    /// `line` and `column` locate the first character of `text` in its source
    /// document so parse errors point at the right place.
    static Expression parse(std::string_view text, const SymbolTable& symbols, int line = 1,
                            int column = 1) {
        Parser p{text, symbols, line, column, 0};
        Expression e;
        p.skip_ws();
        e.root_ = p.parse_expr(e.nodes_);
        p.skip_ws();
        if (p.pos < text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
        e.params_ = symbols.params;
        return e;
    }

    static Expression constant(double v) {
        Expression e;
        e.nodes_.push_back(Node{Kind::Number, v});
        e.root_ = 0;
        return e;
    }

    bool empty() const { return root_ < 0; }

    /// Parameter names this expression was bound against (slot order).
    const std::vector<std::string>& parameter_names() const { return params_; }

    template <typename T>
    T evaluate(std::span<const T> vars, std::span<const double> params) const {
        return eval<T>(root_, vars, params);
    }

    /// Canonical text; parsing it back reproduces the same tree.
    std::string to_string() const { return print(root_); }

    /// True when the expression depends on no chart variable.
    bool is_constant() const {
        for (const auto& n : nodes_)
            if (n.kind == Kind::Variable) return false;
        return true;
    }

private:
    std::vector<Node> nodes_;
    std::vector<std::string> params_;
    int root_ = -1;

    struct Parser {
        std::string_view text;
        const SymbolTable& symbols;
        int line;
        int column0;
        std::size_t pos;

        [[noreturn]] void fail(const std::string& msg) const {
            throw ParseError(msg, line, column0 + static_cast<int>(pos));
        }

        void skip_ws() {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        }

        bool accept(char ch) {
            skip_ws();
            if (pos < text.size() && text[pos] == ch) {
                ++pos;
                return true;
            }
            return false;
        }

        static int push(std::vector<Node>& nodes, Node n) {
            nodes.push_back(n);
            return static_cast<int>(nodes.size()) - 1;
        }

        int parse_expr(std::vector<Node>& nodes) {
            int lhs = parse_term(nodes);
            for (;;) {
                if (accept('+')) {
                    int rhs = parse_term(nodes);
                    lhs = push(nodes, Node{Kind::Add, 0.0, -1, Func::Sin, lhs, rhs});
                } else if (accept('-')) {
                    int rhs = parse_term(nodes);
                    lhs = push(nodes, Node{Kind::Sub, 0.0, -1, Func::Sin, lhs, rhs});
                } else {
                    return lhs;
                }
            }
        }

        int parse_term(std::vector<Node>& nodes) {
            int lhs = parse_factor(nodes);
            for (;;) {
                if (accept('*')) {
                    int rhs = parse_factor(nodes);
                    lhs = push(nodes, Node{Kind::Mul, 0.0, -1, Func::Sin, lhs, rhs});
                } else if (accept('/')) {
                    int rhs = parse_factor(nodes);
                    lhs = push(nodes, Node{Kind::Div, 0.0, -1, Func::Sin, lhs, rhs});
                } else {
                    return lhs;
                }
            }
        }

        int parse_factor(std::vector<Node>& nodes) {
            int base = parse_unary(nodes);
            if (accept('^')) {
                int exponent = parse_factor(nodes);
                return push(nodes, Node{Kind::Pow, 0.0, -1, Func::Sin, base, exponent});
            }
            return base;
        }

        int parse_unary(std::vector<Node>& nodes) {
            if (accept('-')) {
                int operand = parse_unary(nodes);
                return push(nodes, Node{Kind::Neg, 0.0, -1, Func::Sin, operand, -1});
            }
            return parse_atom(nodes);
        }

        int parse_atom(std::vector<Node>& nodes) {
            skip_ws();
            if (pos >= text.size()) fail("unexpected end of expression");
            const char ch = text[pos];
            if (ch == '(') {
                const std::size_t open = pos;
                ++pos;
                int inner = parse_expr(nodes);
                if (!accept(')')) {
                    pos = open;
                    fail("unclosed parenthesis");
                }
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return parse_number(nodes);
            if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
                const std::size_t start = pos;
                while (pos < text.size() &&
                       (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                    ++pos;
                const std::string_view name = text.substr(start, pos - start);
                return resolve_identifier(nodes, name, start);
            }
            fail("unexpected '" + std::string(1, ch) + "'");
        }

        int parse_number(std::vector<Node>& nodes) {
            const std::size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos < text.size() && text[pos] == '.') {
                ++pos;
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            }
            if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
                std::size_t look = pos + 1;
                if (look < text.size() && (text[look] == '+' || text[look] == '-')) ++look;
                if (look < text.size() && std::isdigit(static_cast<unsigned char>(text[look]))) {
                    pos = look;
                    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                        ++pos;
                }
            }
            const std::string literal(text.substr(start, pos - start));
            if (literal == ".") {
                pos = start;
                fail("malformed number");
            }
            return push(nodes, Node{Kind::Number, std::strtod(literal.c_str(), nullptr)});
        }

        int resolve_identifier(std::vector<Node>& nodes, std::string_view name, std::size_t start) {
            if (auto f = lookup_function(name)) {
                skip_ws();
                if (pos >= text.size() || text[pos] != '(') {
                    pos = start;
                    throw ArityError("function '" + std::string(name) + "' expects 1 argument at line " +
                                     std::to_string(line) + ", column " +
                                     std::to_string(column0 + static_cast<int>(start)));
                }
                const std::size_t open = pos;
                ++pos;
                int arg = parse_expr(nodes);
                int count = 1;
                while (accept(',')) {
                    parse_expr(nodes);
                    ++count;
                }
                if (!accept(')')) {
                    pos = open;
                    fail("unclosed parenthesis");
                }
                if (count != 1)
                    throw ArityError("function '" + std::string(name) + "' expects 1 argument, got " +
                                     std::to_string(count) + " at line " + std::to_string(line) +
                                     ", column " + std::to_string(column0 + static_cast<int>(start)));
                return push(nodes, Node{Kind::Call, 0.0, -1, *f, arg, -1});
            }
            if (name == "pi") return push(nodes, Node{Kind::Number, std::numbers::pi});
            if (int k = variable_index(name); k > 0 && k <= symbols.variables)
                return push(nodes, Node{Kind::Variable, 0.0, k - 1});
            if (auto slot = symbols.param_slot(name))
                return push(nodes, Node{Kind::Parameter, 0.0, *slot});
            throw UnboundIdentifier("unbound identifier '" + std::string(name) + "' at line " +
                                    std::to_string(line) + ", column " +
                                    std::to_string(column0 + static_cast<int>(start)));
        }
    };

    template <typename T>
    static T call(Func f, const T& x) {
        using std::sin, std::cos, std::tan, std::sinh, std::cosh, std::tanh, std::sqrt, std::exp,
            std::log;
        switch (f) {
        case Func::Sin: return sin(x);
        case Func::Cos: return cos(x);
        case Func::Tan: return tan(x);
        case Func::Sinh: return sinh(x);
        case Func::Cosh: return cosh(x);
        case Func::Tanh: return tanh(x);
        case Func::Sqrt: return sqrt(x);
        case Func::Exp: return exp(x);
        case Func::Log: return log(x);
        }
        return x;
    }

    template <typename T>
    static T power(const T& base, const T& exponent) {
        using std::pow;
        return pow(base, exponent);
    }

    template <typename T>
    T eval(int idx, std::span<const T> vars, std::span<const double> params) const {
        using std::isfinite;
        const Node& n = nodes_[idx];
        T out{};
        switch (n.kind) {
        case Kind::Number: return T(n.number);
        case Kind::Variable: return vars[n.slot];
        case Kind::Parameter: return T(params[n.slot]);
        case Kind::Neg: return -eval<T>(n.lhs, vars, params);
        case Kind::Add: out = eval<T>(n.lhs, vars, params) + eval<T>(n.rhs, vars, params); break;
        case Kind::Sub: out = eval<T>(n.lhs, vars, params) - eval<T>(n.rhs, vars, params); break;
        case Kind::Mul: out = eval<T>(n.lhs, vars, params) * eval<T>(n.rhs, vars, params); break;
        case Kind::Div: out = eval<T>(n.lhs, vars, params) / eval<T>(n.rhs, vars, params); break;
        case Kind::Pow:
            out = power(eval<T>(n.lhs, vars, params), eval<T>(n.rhs, vars, params));
            break;
        case Kind::Call: out = call(n.func, eval<T>(n.lhs, vars, params)); break;
        }
        if (!isfinite(out)) throw EvalError("non-finite value in '" + print(idx) + "'");
        return out;
    }

    static int precedence(Kind k) {
        switch (k) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        default: return 3;
        }
    }

    std::string print(int idx) const {
        const Node& n = nodes_[idx];
        auto wrap = [](const std::string& s) { return "(" + s + ")"; };
        switch (n.kind) {
        case Kind::Number: return format_real(n.number);
        case Kind::Variable: return "x" + std::to_string(n.slot + 1);
        case Kind::Parameter: return params_.at(n.slot);
        case Kind::Call: return std::string(function_name(n.func)) + "(" + print(n.lhs) + ")";
        case Kind::Neg: {
            const Kind k = nodes_[n.lhs].kind;
            const bool paren = precedence(k) < 3 || k == Kind::Pow;
            return "-" + (paren ? wrap(print(n.lhs)) : print(n.lhs));
        }
        case Kind::Pow: {
            const Kind b = nodes_[n.lhs].kind;
            const Kind e = nodes_[n.rhs].kind;
            const bool pb = precedence(b) < 3 || b == Kind::Pow;
            const bool pe = precedence(e) < 3;
            return (pb ? wrap(print(n.lhs)) : print(n.lhs)) + "^" +
                   (pe ? wrap(print(n.rhs)) : print(n.rhs));
        }
        default: {
            const int p = precedence(n.kind);
            const char* op = n.kind == Kind::Add   ? " + "
                             : n.kind == Kind::Sub ? " - "
                             : n.kind == Kind::Mul ? "*"
                                                   : "/";
            const bool pl = precedence(nodes_[n.lhs].kind) < p;
            const bool pr = precedence(nodes_[n.rhs].kind) <= p;
            return (pl ? wrap(print(n.lhs)) : print(n.lhs)) + op +
                   (pr ? wrap(print(n.rhs)) : print(n.rhs));
        }
        }
    }
};

/// Evaluates a variable-free expression (domain bounds, parameter values).
inline double evaluate_constant(std::string_view text, const SymbolTable& symbols = {},
                                std::span<const double> param_values = {}, int line = 1,
                                int column = 1) {
    const auto e = Expression::parse(text, symbols, line, column);
    if (!e.is_constant()) throw ParseError("expected a constant expression", line, column);
    return e.evaluate<double>({}, param_values);
}

} // namespace deltaforge
