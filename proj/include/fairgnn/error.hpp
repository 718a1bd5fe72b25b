// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fairgnn {

/// Base class for all toolkit errors. `exit_code()` maps onto the CLI contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Bad configuration or argument values (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Shape mismatch or other misuse of the tensor/tape API.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced during training (CLI exit code 4).
class DivergenceError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

/// An evaluation quantity is undefined on the given input (e.g. empty group).
class MetricError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace fairgnn
