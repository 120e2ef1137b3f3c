#include "pcc/errors.hpp"

namespace pcc {

namespace {

std::string format_location(const std::string& source, std::size_t line, const std::string& what) {
    if (line == 0) {
        return source + ": " + what;
    }
    return source + ":" + std::to_string(line) + ": " + what;
}

} // namespace

ParseError::ParseError(std::string source, std::size_t line, const std::string& what)
    : Error(format_location(source, line, what)), source_(std::move(source)), line_(line) {}

} // namespace pcc
