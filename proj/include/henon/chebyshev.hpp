#pragma once

#include <cmath>

#include <Eigen/Core>

#include "henon/boxes.hpp"

namespace henon {
namespace cheb {

// Chebyshev points of the first kind (Gauss nodes), decreasing order.
inline Eigen::VectorXd nodes(int count) {
  Eigen::VectorXd x(count);
  for (int i = 0; i < count; ++i)
    x[i] = std::cos(M_PI * (i + 0.5) / count);
  return x;
}

inline Eigen::VectorXd nodes(int count, const Interval& iv) {
  Eigen::VectorXd x = nodes(count);
  for (int i = 0; i < count; ++i) x[i] = iv.from_unit(x[i]);
  return x;
}

// Matrix taking values at first-kind nodes to Chebyshev coefficients.
inline Eigen::MatrixXd value_to_coeff(int count) {
  Eigen::MatrixXd m(count, count);
  for (int k = 0; k < count; ++k) {
    const double scale = (k == 0 ? 1.0 : 2.0) / count;
    for (int i = 0; i < count; ++i)
      m(k, i) = scale * std::cos(k * M_PI * (i + 0.5) / count);
  }
  return m;
}

// Values T_0(t)..T_{n-1}(t) for t in reference coordinates.
inline void t_values(double t, Eigen::VectorXd& out) {
  const int n = static_cast<int>(out.size());
  if (n > 0) out[0] = 1.0;
  if (n > 1) out[1] = t;
  for (int k = 2; k < n; ++k) out[k] = 2.0 * t * out[k - 1] - out[k - 2];
}

// Divided differences (T_k(a) - T_k(b)) / (a - b), stable for a close to b.
// Recurrence: D_{k+1} = 2 a D_k + 2 T_k(b) - D_{k-1}.
inline void t_divided_differences(double a, double b, Eigen::VectorXd& out) {
  const int n = static_cast<int>(out.size());
  double tb_prev = 1.0, tb = b;  // T_0(b), T_1(b)
  if (n > 0) out[0] = 0.0;
  if (n > 1) out[1] = 1.0;
  for (int k = 2; k < n; ++k) {
    out[k] = 2.0 * a * out[k - 1] + 2.0 * tb - out[k - 2];
    const double tb_next = 2.0 * b * tb - tb_prev;
    tb_prev = tb;
    tb = tb_next;
  }
}

// Coefficients of the derivative of a Chebyshev series on [-1, 1].
inline Eigen::VectorXd derivative_coeffs(const Eigen::VectorXd& a) {
  const int n = static_cast<int>(a.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(std::max(n - 1, 1));
  if (n <= 1) return b;
  // b_{k-1} = b_{k+1} + 2k a_k, downward; the k=0 coefficient is halved.
  double next = 0.0, next2 = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    const double bk = next2 + 2.0 * k * a[k];
    b[k - 1] = bk;
    next2 = next;
    next = bk;
  }
  b[0] *= 0.5;
  return b;
}

}  // namespace cheb
}  // namespace henon
