#pragma once

#include <stdexcept>
#include <string>

namespace lact {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad command-line usage or invalid configuration values.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed or mismatching data (files, shapes, geometry).
class DataError : public Error {
public:
    using Error::Error;
};

class MagicError : public DataError {
public:
    MagicError(const std::string& expected, const std::string& found)
        : DataError("bad magic: expected '" + expected + "', found '" + found + "'"),
          expected_(expected), found_(found) {}
    const std::string& expected() const { return expected_; }
    const std::string& found() const { return found_; }

private:
    std::string expected_;
    std::string found_;
};

class TruncatedError : public DataError {
public:
    using DataError::DataError;
};

class VersionError : public DataError {
public:
    using DataError::DataError;
};

class GeometryError : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

/// Non-finite values or other numeric breakdowns.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace lact
