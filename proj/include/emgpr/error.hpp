#pragma once

#include <stdexcept>
#include <string>

namespace emgpr {

/// Broad failure class; the CLI maps it onto its exit status.
enum class ErrorClass { validation, data, internal };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what)
        : std::runtime_error(what), cls_(cls) {}

    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

/// Bad configuration or arguments: specs, hyperparameters, splits.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what)
        : Error(ErrorClass::validation, what) {}
};

/// Bad or incompatible input data: malformed files, shape mismatches.
class DataError : public Error {
public:
    explicit DataError(const std::string& what)
        : Error(ErrorClass::data, what) {}
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class ChannelCountError : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

class InputTooShortError : public DataError {
public:
    using DataError::DataError;
};

class SpecError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SplitError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class HyperparameterError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateDataError : public DataError {
public:
    using DataError::DataError;
};

class LabelError : public DataError {
public:
    using DataError::DataError;
};

} // namespace emgpr
