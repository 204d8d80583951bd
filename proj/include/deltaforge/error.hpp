#pragma once

#include <stdexcept>
#include <string>

namespace deltaforge {

/// Base of every error raised by the library. `kind()` is the stable name
/// written into reports when a per-point failure is captured.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define DELTAFORGE_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                                    \
    public:                                                                        \
        explicit Name(const std::string& what) : Error(#Name, what) {}             \
    };

DELTAFORGE_DEFINE_ERROR(DomainError)
DELTAFORGE_DEFINE_ERROR(EvalError)
DELTAFORGE_DEFINE_ERROR(DimensionError)
DELTAFORGE_DEFINE_ERROR(KindError)
DELTAFORGE_DEFINE_ERROR(UnboundIdentifier)
DELTAFORGE_DEFINE_ERROR(ArityError)
DELTAFORGE_DEFINE_ERROR(ConstraintError)
DELTAFORGE_DEFINE_ERROR(RangeError)
DELTAFORGE_DEFINE_ERROR(SingularPointError)
DELTAFORGE_DEFINE_ERROR(DegenerateMetricError)
DELTAFORGE_DEFINE_ERROR(SignatureError)
DELTAFORGE_DEFINE_ERROR(DegeneratePlaneError)
DELTAFORGE_DEFINE_ERROR(NonOrthonormalError)
DELTAFORGE_DEFINE_ERROR(RankError)
DELTAFORGE_DEFINE_ERROR(PartitionError)
DELTAFORGE_DEFINE_ERROR(InequalityViolation)
DELTAFORGE_DEFINE_ERROR(UnsupportedError)
DELTAFORGE_DEFINE_ERROR(ConfigError)
DELTAFORGE_DEFINE_ERROR(IoError)

#undef DELTAFORGE_DEFINE_ERROR

/// Parse failure with a 1-based source position.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error("ParseError", what + " at line " + std::to_string(line) + ", column " +
                                  std::to_string(column)),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

} // namespace deltaforge
