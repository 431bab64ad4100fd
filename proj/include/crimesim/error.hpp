#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crimesim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid model, mesh or solver parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid mesh connectivity or geometry; carries the offending element.
class TopologyError : public Error {
public:
    TopologyError(const std::string& what, std::size_t element)
        : Error("element " + std::to_string(element) + ": " + what), element_(element) {}
    std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

/// A field reached a value where the model degenerates (A -> 0 in 2 grad A / A).
class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, std::size_t element)
        : Error(what), element_(element) {}
    std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace crimesim
