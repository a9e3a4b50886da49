#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace wg::numerics {

template <typename Scalar>
using Column = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Fornberg's recursion. Row m of the result holds the weights of the m-th
/// derivative at x0 for the nodes xs.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> fornberg_weights(Scalar x0,
                                                                       const Column<Scalar>& xs,
                                                                       int max_order) {
  const Eigen::Index n = xs.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(max_order + 1, n);
  Scalar c1 = 1, c4 = xs[0] - x0;
  c(0, 0) = 1;
  for (Eigen::Index i = 1; i < n; ++i) {
    const int mn = static_cast<int>(std::min<Eigen::Index>(i, max_order));
    Scalar c2 = 1;
    const Scalar c5 = c4;
    c4 = xs[i] - x0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const Scalar c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(k, i) = c1 * (k * c(k - 1, i - 1) - c5 * c(k, i - 1)) / c2;
        c(0, i) = -c1 * c5 * c(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) c(k, j) = (c4 * c(k, j) - k * c(k - 1, j)) / c3;
      c(0, j) = c4 * c(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

/// First and second derivatives at every node from the 5-point window around
/// it (centered in the interior, shifted at the ends). On a uniform grid this is
/// the classical 4th-order centered stencil.
template <typename Scalar>
void nodal_derivatives(const Column<Scalar>& x, const Column<Scalar>& y, Column<Scalar>& dy,
                       Column<Scalar>& d2y) {
  const Eigen::Index n = x.size();
  dy.resize(n);
  d2y.resize(n);
  const Eigen::Index width = std::min<Eigen::Index>(5, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index start = std::clamp<Eigen::Index>(i - width / 2, 0, n - width);
    const Column<Scalar> xs = x.segment(start, width);
    const auto w = fornberg_weights<Scalar>(x[i], xs, std::min<int>(2, static_cast<int>(width) - 1));
    const auto ys = y.segment(start, width).matrix();
    dy[i] = w.row(1).dot(ys);
    d2y[i] = w.rows() > 2 ? Scalar(w.row(2).dot(ys)) : Scalar(0);
  }
}

/// Centered difference with one level of Richardson extrapolation.
template <typename Scalar, typename F>
Scalar derivative(F&& f, Scalar x, Scalar h) {
  auto central = [&](Scalar s) { return (f(x + s) - f(x - s)) / (2 * s); };
  return (4 * central(h / 2) - central(h)) / 3;
}

template <typename Scalar, typename F>
Scalar second_derivative(F&& f, Scalar x, Scalar h) {
  const Scalar f0 = f(x);
  auto central = [&](Scalar s) { return (f(x + s) - 2 * f0 + f(x - s)) / (s * s); };
  return (4 * central(h / 2) - central(h)) / 3;
}

/// Default step for numeric partials of Lagrangians.
template <typename Scalar>
Scalar partial_step(Scalar x) {
  return Scalar(1e-5) * (1 + std::abs(x));
}

}  // namespace wg::numerics
