#pragma once

#include <stdexcept>
#include <string>

#include "recess/month.hpp"

namespace recess {

/// Base of every error raised by the library. The CLI maps the three
/// direct subclasses onto exit codes 2 (usage), 3 (data) and 4 (empty result).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class EmptyResultError : public Error {
public:
    using Error::Error;
};

// Usage-side failures.
class GridError : public UsageError {
public:
    using UsageError::UsageError;
};

class ConfigError : public UsageError {
public:
    using UsageError::UsageError;
};

// Data-side failures.
class GapError : public DataError {
public:
    explicit GapError(MonthIndex missing)
        : DataError("gap in monthly series: missing " + missing.to_string()), missing_(missing) {}
    [[nodiscard]] MonthIndex missing() const noexcept { return missing_; }

private:
    MonthIndex missing_;
};

class FormatError : public DataError {
public:
    FormatError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptyError : public DataError {
public:
    using DataError::DataError;
};

class DomainError : public DataError {
public:
    using DataError::DataError;
};

class AlignmentError : public DataError {
public:
    using DataError::DataError;
};

class OrderError : public DataError {
public:
    using DataError::DataError;
};

class NotPerfectError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateError : public DataError {
public:
    using DataError::DataError;
};

class EmptyFrontierError : public EmptyResultError {
public:
    using EmptyResultError::EmptyResultError;
};

}  // namespace recess
