#pragma once

#include <stdexcept>
#include <string>

namespace dmsc {

// Base class for everything this library throws on purpose.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or violated precondition (mismatched inputs, invalid
// hyperparameters, missing prerequisites).
class config_error : public error {
public:
    using error::error;
};

// Incompatible matrix/vector dimensions.
class shape_error : public config_error {
public:
    using config_error::config_error;
};

// Malformed file content. Carries the location when known.
class parse_error : public error {
public:
    using error::error;
    parse_error(const std::string& path, std::size_t line, const std::string& what)
        : error(path + ":" + std::to_string(line) + ": " + what) {}
};

// Training produced a non-finite loss.
class divergence_error : public error {
public:
    using error::error;
};

// Non-finite value in a numerical routine.
class numeric_error : public error {
public:
    using error::error;
};

}  // namespace dmsc
