#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (length, range, finiteness).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// The input is well-formed but the statistic is undefined on it
/// (zero variance, zero-norm embedding, constant predictions).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// A loss, gradient or parameter became NaN or infinite.
class TrainingDiverged : public Error {
public:
    using Error::Error;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

/// Malformed dataset file. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what);

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// The synthetic generator could not satisfy its configuration.
class GenerationError : public Error {
public:
    using Error::Error;
};

} // namespace pcc
