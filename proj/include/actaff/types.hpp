#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace actaff {

using Scalar = double;

using Vec  = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Mat  = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using VecI = Eigen::Matrix<int, Eigen::Dynamic, 1>;

} // namespace actaff
