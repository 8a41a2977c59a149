#pragma once

#include <Eigen/Dense>

namespace cfc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace cfc
