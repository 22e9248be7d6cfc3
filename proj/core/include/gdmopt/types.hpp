#pragma once

#include <Eigen/Dense>

namespace gdmopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace gdmopt
