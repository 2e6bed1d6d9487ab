#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace prawn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using MatF = Eigen::MatrixXf;
using VecI = Eigen::VectorXi;
using Index = Eigen::Index;

} // namespace prawn
