#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace bada {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Eigen::Index;

}  // namespace bada
