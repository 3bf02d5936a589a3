#pragma once

#include <stdexcept>
#include <string>

namespace levystop {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation at a point outside an operation's domain (e.g. the Lévy density at y = 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid model, payoff or numerical parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// The operation is mathematically undefined for this model (e.g. the reduced
/// integral operator for infinite-variation jumps).
class UnsupportedOperation : public Error {
public:
    using Error::Error;
};

/// A run configuration that cannot be turned into a valid solve.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical failure detected while solving (loss of monotonicity, non-finite values).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A checked runtime invariant does not hold. `check()` names the failing check.
class InvariantViolation : public Error {
public:
    InvariantViolation(std::string check, const std::string& what)
        : Error(what), check_(std::move(check)) {}
    const std::string& check() const noexcept { return check_; }

private:
    std::string check_;
};

}  // namespace levystop
