#pragma once

#include <stdexcept>
#include <string>

namespace hdlr {

// Numerical failures that callers may want to catch and map to exit codes.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Safeguarded Newton (prox) or a fixed-point iteration ran out of iterations.
struct NonConvergenceError : NumericError {
    using NumericError::NumericError;
};

// solve_b could not bracket a root below b = 1e12.
struct BracketFailureError : NumericError {
    using NumericError::NumericError;
};

// kappa outside the admissible range (0, 1/2).
struct KappaOutOfRangeError : std::domain_error {
    using std::domain_error::domain_error;
};

// Singular Hessian / Gram matrix.
struct SingularMatrixError : NumericError {
    using NumericError::NumericError;
};

// File / CSV parse problems; message carries the offending line number.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hdlr
