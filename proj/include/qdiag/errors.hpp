#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdiag {

/// Malformed Matrix Market content. Carries the 1-based line number where
/// parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that falls outside the supported matrix subset
/// (complex field, non-square shape, dense array bodies).
class UnsupportedMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A relative-error target against a zero denominator (A_pp = 0 for the
/// element-wise target, all-zero diagonal for the norm-wise one).
class DegenerateTargetError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace qdiag
