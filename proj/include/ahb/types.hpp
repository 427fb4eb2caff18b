#pragma once

#include <Eigen/Dense>

namespace ahb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

} // namespace ahb
