#pragma once

#include <stdexcept>
#include <string>

namespace fadefuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every term of the fusion information sum is zero, so the BLUE variance is
/// unbounded. Monte Carlo callers count this as an outage.
class AllPowerZero : public Error {
public:
    AllPowerZero() : Error("all sensors contribute zero information (distortion unbounded)") {}
};

/// No sensor has a positive merit, so no budget can reduce distortion.
class NoUsableSensor : public Error {
public:
    NoUsableSensor() : Error("no sensor has a usable channel (all merits are zero)") {}
};

/// The distortion target lies at or below the floor sigma_theta^2 / sum(gamma).
class InfeasibleTarget : public Error {
public:
    InfeasibleTarget(double target, double floor)
        : Error("distortion target " + std::to_string(target) +
                " is not above the feasibility floor " + std::to_string(floor)),
          target_(target),
          floor_(floor) {}

    double target() const noexcept { return target_; }
    double floor() const noexcept { return floor_; }

private:
    double target_;
    double floor_;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

/// The Legendre supremum is attained on the boundary of the MGF domain.
class DivergentMGF : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// A structural property the closed forms guarantee did not hold.
class InternalConsistency : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fadefuse
