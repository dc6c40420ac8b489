#ifndef CROPCAST_ERROR_HPP
#define CROPCAST_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cropcast {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateKeyError : public Error {
public:
    using Error::Error;
};

/// A value violates a documented domain bound (humidity outside [0,100], ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Singular or otherwise degenerate numerical problem.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class VersionError : public Error {
public:
    using Error::Error;
};

class EmptyCatalogError : public Error {
public:
    using Error::Error;
};

}  // namespace cropcast

#endif  // CROPCAST_ERROR_HPP
