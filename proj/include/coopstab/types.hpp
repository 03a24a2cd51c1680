#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace coopstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when a trajectory or sample leaves the configured guard box.
struct BlowupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace coopstab
