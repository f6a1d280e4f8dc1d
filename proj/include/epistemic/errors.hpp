#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epi {

// Bad parameters supplied by a caller: unknown agent, time past the horizon,
// unsatisfiable scenario, engine/formula mismatch.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The model itself misbehaved while executing, e.g. a program read a history
// variable before it was assigned.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace epi
