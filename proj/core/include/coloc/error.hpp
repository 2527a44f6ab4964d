#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coloc {

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorCategory {
    Usage,    // bad arguments or configuration
    Data,     // malformed or inconsistent input data
    Numeric,  // filter / solver breakdown
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

  private:
    ErrorCategory category_;
};

class InvalidArgument : public Error {
  public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

/// Pose composed across frames that do not chain.
class FrameMismatch : public Error {
  public:
    explicit FrameMismatch(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class NumericError : public Error {
  public:
    explicit NumericError(const std::string& what) : Error(ErrorCategory::Numeric, what) {}
};

/// Event older than the filter's current time. Recoverable: the caller
/// drops the event and keeps going.
class OutOfOrderEvent : public Error {
  public:
    explicit OutOfOrderEvent(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

/// Base for trajectory-file ingestion failures. `row()` counts data rows
/// (1-based, header excluded) and `line()` physical file lines; both are 0
/// when not applicable.
class DataError : public Error {
  public:
    DataError(const std::string& what, std::size_t row, std::size_t line)
        : Error(ErrorCategory::Data, what), row_(row), line_(line) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t row_;
    std::size_t line_;
};

class ParseError : public DataError {
  public:
    using DataError::DataError;
};

class ColumnCountError : public DataError {
  public:
    using DataError::DataError;
};

class NonFiniteValueError : public DataError {
  public:
    using DataError::DataError;
};

class QuaternionNormError : public DataError {
  public:
    using DataError::DataError;
};

class MonotonicityError : public DataError {
  public:
    using DataError::DataError;
};

class DuplicateTimestampError : public DataError {
  public:
    using DataError::DataError;
};

class IoError : public DataError {
  public:
    explicit IoError(const std::string& what) : DataError(what, 0, 0) {}
};

}  // namespace coloc
