#pragma once

#include <stdexcept>
#include <string>

namespace ganspec {

/// Base for all library failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be read, written, or parsed.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

/// Inputs violate an operation's contract (bad dimensions, missing class, ...).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what) {}
};

/// A fit collapsed (constant data, indistinguishable clusters).
class DegenerateFitError : public DataError {
public:
    explicit DegenerateFitError(const std::string& what) : DataError(what) {}
};

} // namespace ganspec
