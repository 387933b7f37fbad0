#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace apcbms {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Invalid inputs and violated preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failures (singular systems, non-converged iterations).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File and process level failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace apcbms
