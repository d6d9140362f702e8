#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace focal {

// Root of every error raised by the library. Callers that only care about
// "something in focal-calib went wrong" can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// h(v) = v / phi(v) blows up at v == 1.
class SingularityError : public Error {
public:
    using Error::Error;
};

// Threshold queries are meaningless for gamma == 0 (phi is constant 1).
class DegenerateError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class EmptyDataError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch)
        : Error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

// Data-file errors carry the 1-based line number they were detected on
// (0 when the problem is not tied to a line).
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class InconsistentK : public DataError {
public:
    using DataError::DataError;
};

class InvalidSimplex : public DataError {
public:
    using DataError::DataError;
};

}  // namespace focal
