#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsc {

enum class ErrorKind {
    // expr
    Incomplete,
    Overfull,
    UnknownToken,
    FeatureIndexOutOfRange,
    // policy
    DeadEnd,
    ZeroProbability,
    // classify
    LengthMismatch,
    EmptyDataset,
    // trainer
    EmptyBatch,
    ConfigInvalid,
    DataInvalid,
    // pareto
    EmptyArchive,
    EmptyFront,
    // rules
    OutOfRange,
    NotReducible,
    // data
    SchemaMismatch,
    ParseError,
    SingleClass,
    // io
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the ErrorKind codes so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace dsc
