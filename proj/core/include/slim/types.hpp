#pragma once

#include <Eigen/Dense>

namespace slim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

} // namespace slim
