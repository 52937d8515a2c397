#pragma once

#include <stdexcept>
#include <string>

namespace hpot {

// Bad configuration or command-line usage. Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or degenerate input data. Maps to exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A sampler or special function could not produce a finite result. Maps to exit code 4.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hpot
