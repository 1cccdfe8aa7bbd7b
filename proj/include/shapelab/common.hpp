#pragma once

#include <Eigen/Core>

namespace shapelab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;  // point sets are stored as rows

}  // namespace shapelab
