#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nodelab {

// Invalid configuration or generator parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Caller violated a documented precondition (wrong node, incomplete labeling...).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// An action that fails the problem's extensibility test.
class IllegalActionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// log of a non-positive number, non-finite values where finite ones are required.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Search budget exhausted; carries the bounds known at that point.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, long lower_bound, long upper_bound)
        : std::runtime_error(what), lower_bound_(lower_bound), upper_bound_(upper_bound) {}

    long lower_bound() const noexcept { return lower_bound_; }
    long upper_bound() const noexcept { return upper_bound_; }

private:
    long lower_bound_;
    long upper_bound_;
};

class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nodelab
