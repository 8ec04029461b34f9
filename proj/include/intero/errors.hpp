#pragma once

#include <stdexcept>
#include <string>

namespace intero {

/// Invalid experiment or module configuration (bad bounds, dimension mismatch, bad keys).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an operation precondition (index out of range, empty input).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A non-finite value surfaced inside a run; carries the offending step.
class NumericError : public std::runtime_error {
public:
    NumericError(long long step, const std::string& what)
        : std::runtime_error("non-finite value at step " + std::to_string(step) + ": " + what),
          step_(step) {}

    long long step() const noexcept { return step_; }

private:
    long long step_;
};

} // namespace intero
