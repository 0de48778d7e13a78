#pragma once

#include <Eigen/Dense>

namespace scc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace scc
