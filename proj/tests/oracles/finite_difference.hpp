#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace oracle {

/// Central differences with a step scaled to each coordinate's magnitude.
template <typename F>
Eigen::VectorXd central_difference(const F& f, const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    const double fp = f(xp);
    xp(i) = x(i) - step;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2 * step);
  }
  return g;
}

/// ||a - b|| / max(||b||, floor)
inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-12) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

}  // namespace oracle
