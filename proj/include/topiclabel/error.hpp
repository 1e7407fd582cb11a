#pragma once

#include <stdexcept>
#include <string>

namespace topiclabel {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input errors: bad files, bad arguments, bad configuration.
// The CLI maps these to exit code 1.

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// Runtime errors: failures of a well-formed run. Exit code 2.

class PoolExhaustedError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

/// True for error classes that indicate bad user input rather than a
/// failure at run time.
bool is_input_error(const Error& e);

}  // namespace topiclabel
