#pragma once

#include <stdexcept>
#include <string>

namespace dvb {

/// Raised when an argument lies outside the domain of an operation
/// (negative firm value, time outside [0, T], non-positive-definite form, ...).
class DomainError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// Raised when an adaptive numerical routine exhausts its evaluation budget.
/// Carries the best estimate reached and its error bound.
class ConvergenceError : public std::runtime_error {
   public:
    ConvergenceError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

   private:
    double estimate_;
    double error_bound_;
};

}  // namespace dvb
