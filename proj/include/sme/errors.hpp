#pragma once

#include <stdexcept>
#include <string>

namespace sme {

// Error families map onto the CLI exit codes: configuration problems exit
// with 2, data problems with 3 and numerical failures with 4.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class IntegrityError : public DataError {
public:
    using DataError::DataError;
};

// Unknown symbol or id out of range.
class LookupError : public DataError {
public:
    using DataError::DataError;
};

// AUC-PR needs at least one positive and one negative label.
class UndefinedMetricError : public DataError {
public:
    using DataError::DataError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

}  // namespace sme
