#pragma once

#include <Eigen/Dense>
#include <complex>

namespace levy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using cplx = std::complex<double>;

}  // namespace levy
