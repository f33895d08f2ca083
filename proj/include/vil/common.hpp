#ifndef VIL_COMMON_HPP
#define VIL_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vil {

using Real = double;
using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr Real PI = 3.141592653589793238462643383279502884;

struct VilError : std::runtime_error {
  explicit VilError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace vil

#endif
