#pragma once

#include <Eigen/Dense>

namespace hrbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sign with the +1 tie convention used throughout (sgn(0) -> +1).
inline double sign_pm(double x) { return x >= 0.0 ? 1.0 : -1.0; }

inline Matrix sign_pm(const Matrix& m) {
  return m.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
}

inline Vector sign_pm(const Vector& v) {
  return v.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
}

inline bool is_pm_one(const Matrix& m) {
  return ((m.array() == 1.0) || (m.array() == -1.0)).all();
}

// log(cosh(x)) without overflow for large |x|.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

}  // namespace hrbm
