#pragma once

#include <stdexcept>
#include <string>

namespace mediaprof {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (bad JSON, bad label string, bad timestamp). Carries a
// line number when the source is line-oriented.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Contract violation on otherwise well-formed data.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A referenced artifact (file, model, feature bundle, plan row) is absent.
class NotFoundError : public Error {
public:
    using Error::Error;
};

// Transient transport failure; callers may retry.
class NetworkError : public Error {
public:
    using Error::Error;
};

// Iterative solver hit its iteration bound. Carries the best iterate's
// diagnostics so callers can inspect how far off it was.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, long iterations, long violations)
        : Error(msg), iterations_(iterations), violations_(violations) {}
    long iterations() const { return iterations_; }
    long kkt_violations() const { return violations_; }

private:
    long iterations_;
    long violations_;
};

} // namespace mediaprof
