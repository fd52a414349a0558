#ifndef FMQED_TYPES_HPP
#define FMQED_TYPES_HPP

#include <complex>
#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

namespace fmqed {

using cplx = std::complex<double>;

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
using Vec3 = Vec3T<double>;
using Vec3i = Eigen::Vector3i;

using VecX = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<cplx>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace fmqed

#endif
