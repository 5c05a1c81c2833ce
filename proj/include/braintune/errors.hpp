#pragma once

#include <stdexcept>
#include <string>

namespace braintune {

// Base class for all library errors. The CLI maps subclasses onto exit
// codes: ConfigError -> 2, FormatError/DegenerateInputError/DimensionError
// -> 3, NumericError -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor/matrix shape disagreement.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Input data is degenerate (zero variance region, zero-norm vector,
// single-class training set, empty cohort).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// An API precondition was violated (non-scalar backward, double backward,
// missing gradient).
class ContractError : public Error {
public:
    using Error::Error;
};

// Invalid configuration (bad hyperparameter, wrong phase, bad flag combo).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unparsable or inconsistent file contents (dataset, checkpoint).
class FormatError : public Error {
public:
    using Error::Error;
};

// Non-finite value detected where the pipeline requires finite numbers.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace braintune
