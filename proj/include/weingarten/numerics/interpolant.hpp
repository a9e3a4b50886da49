#pragma once

#include <algorithm>
#include <cstddef>

#include <Eigen/Dense>

#include "weingarten/error.hpp"
#include "weingarten/numerics/finite_difference.hpp"

namespace wg::numerics {

template <typename Scalar>
struct Jet {
  Scalar value, d1, d2;
};

/// C2 piecewise quintic Hermite through nodal values, slopes and curvatures.
template <typename Scalar>
class QuinticHermite {
 public:
  QuinticHermite() = default;
  QuinticHermite(Column<Scalar> x, Column<Scalar> y, Column<Scalar> dy, Column<Scalar> d2y)
      : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)), d2y_(std::move(d2y)) {}

  static QuinticHermite from_samples(const Column<Scalar>& x, const Column<Scalar>& y) {
    if (x.size() < 2) throw Error(ErrorKind::EmptyDomain, "interpolation needs at least two samples");
    Column<Scalar> dy, d2y;
    nodal_derivatives(x, y, dy, d2y);
    return QuinticHermite(x, y, dy, d2y);
  }

  bool empty() const { return x_.size() == 0; }
  Scalar lower() const { return x_[0]; }
  Scalar upper() const { return x_[x_.size() - 1]; }
  const Column<Scalar>& nodes() const { return x_; }
  const Column<Scalar>& slopes() const { return dy_; }
  const Column<Scalar>& curvatures() const { return d2y_; }

  Jet<Scalar> operator()(Scalar s) const {
    if (empty() || s < lower() || s > upper())
      throw Error(ErrorKind::Domain, "interpolant queried outside its sample range");
    Eigen::Index i = std::upper_bound(x_.data(), x_.data() + x_.size(), s) - x_.data();
    i = std::clamp<Eigen::Index>(i, 1, x_.size() - 1);
    const Scalar h = x_[i] - x_[i - 1];
    const Scalar a0 = y_[i - 1], a1 = h * dy_[i - 1], a2 = h * h * d2y_[i - 1] / 2;
    const Scalar Y = y_[i] - a0 - a1 - a2, D = h * dy_[i] - a1 - 2 * a2, S = h * h * d2y_[i] - 2 * a2;
    const Scalar a3 = 10 * Y - 4 * D + S / 2;
    const Scalar a4 = -15 * Y + 7 * D - S;
    const Scalar a5 = 6 * Y - 3 * D + S / 2;
    const Scalar t = (s - x_[i - 1]) / h;
    const Scalar v = a0 + t * (a1 + t * (a2 + t * (a3 + t * (a4 + t * a5))));
    const Scalar d1 = a1 + t * (2 * a2 + t * (3 * a3 + t * (4 * a4 + t * 5 * a5)));
    const Scalar d2 = 2 * a2 + t * (6 * a3 + t * (12 * a4 + t * 20 * a5));
    return {v, d1 / h, d2 / (h * h)};
  }

 private:
  Column<Scalar> x_, y_, dy_, d2y_;
};

}  // namespace wg::numerics
