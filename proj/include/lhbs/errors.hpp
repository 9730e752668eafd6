#pragma once

#include <stdexcept>
#include <string>

namespace lhbs {

// Invalid input geometry or parameters (coincident points, odd pilot length, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A configuration field failed validation. Carries the offending key.
class FieldError : public ConfigError {
public:
    FieldError(std::string field, const std::string& what)
        : ConfigError(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Synthesis window cannot hold the signal energy.
class WindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Estimator could not lock onto a signal (low correlation peak, zero combiner output).
class DetectionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fisher information matrix is not positive definite.
class SingularFimError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace lhbs
