#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mckay {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using IVector = Eigen::VectorXi;

inline constexpr double pi = std::numbers::pi;

// Error kinds map onto the CLI exit-code contract.
class invalid_argument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class degenerate_input : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class numeric_failure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline int wrap(int j, int n) {
  int r = j % n;
  return r < 0 ? r + n : r;
}

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace mckay
