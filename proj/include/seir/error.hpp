#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace seir {

/// Error categories. Every category maps to a distinct CLI exit code.
enum class ErrorKind {
    InvalidArgument,
    Domain,
    Positivity,
    LengthMismatch,
    EmptyInput,
    DegenerateDenominator,
    SingularSystem,
    MissingIncrements,
    ZeroSigma,
    TooFewPoints,
    DegenerateSample,
    WindowViolated,
    Parse,
    NegativeCount,
    Io,
    ReplicateFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exit status used by the command-line tool for each category.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what,
          std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(what), kind_(kind), index_(index) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Offending step, row, or replicate, when the error is tied to one.
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> index_;
};

}  // namespace seir
