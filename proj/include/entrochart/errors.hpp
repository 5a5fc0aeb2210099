#pragma once

#include <stdexcept>
#include <string>

namespace entrochart {

/// Precondition on an argument violated (bad dims, window out of range, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input file could not be parsed. `line()` is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Parsed input violates a data invariant (e.g. non-increasing xs).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Noise can only raise PAE; a target below the clean chart cannot be reached.
class UnreachableTarget : public std::runtime_error {
public:
    UnreachableTarget(const std::string& what, double target, double floor)
        : std::runtime_error(what), target_(target), floor_(floor) {}
    double target() const noexcept { return target_; }
    double floor() const noexcept { return floor_; }

private:
    double target_;
    double floor_;
};

class DegenerateDesign : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace entrochart
