#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace accelgates {

// Argument outside the domain of an operation (tau past the segment end, bad mode index, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The detector position left [0, L]; mode functions are never extrapolated.
class OutOfCavityError : public DomainError {
public:
    OutOfCavityError(double x, double length);

    double position() const noexcept { return x_; }
    double length() const noexcept { return length_; }

private:
    double x_;
    double length_;
};

// A numerical routine could not reach its tolerance inside its budget.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what,
                  std::complex<double> best_estimate = {std::numeric_limits<double>::quiet_NaN(), 0.0},
                  double error_estimate = std::numeric_limits<double>::infinity())
        : std::runtime_error(what), best_(best_estimate), err_(error_estimate) {}

    std::complex<double> best_estimate() const noexcept { return best_; }
    double error_estimate() const noexcept { return err_; }

private:
    std::complex<double> best_;
    double err_;
};

// Inputs that were computed for different setups were combined.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class PlanningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace accelgates
