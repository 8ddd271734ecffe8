#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varcg {

/// Base class for all recoverable errors raised by this library.  The CLI
/// maps these to exit code 2 (bad input); anything else escaping to main is
/// treated as an internal failure (exit code 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text where a grammar was expected (pc expressions, JSON-adjacent
/// formats, diffs).  Carries the byte offset of the first offending character
/// when it is known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message, std::size_t offset = npos)
        : Error(offset == npos ? message
                               : message + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Lexical or structural problems in scanned C source: unterminated comments
/// or literals, unmatched conditional directives, unbalanced braces.  Carries
/// a 1-based source line.
class SourceError : public Error {
public:
    SourceError(const std::string& file, int line, const std::string& message)
        : Error(file + ":" + std::to_string(line) + ": " + message),
          file_(file),
          line_(line) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }

private:
    std::string file_;
    int line_;
};

/// Inconsistent corpus- or artifact-level data: duplicate node ids, edges
/// naming unknown nodes, stored weights that disagree with their pc.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Raised when satisfiability enumeration would exceed the option cap.
class OptionLimitError : public Error {
public:
    using Error::Error;
};

/// Statistical preconditions violated: empty groups, zero variance where a
/// test needs spread, single-class responses, non-finite input.
class StatsError : public Error {
public:
    using Error::Error;
};

/// Design matrix is (numerically) rank deficient during a model fit.
class RankDeficientError : public StatsError {
public:
    using StatsError::StatsError;
};

}  // namespace varcg
