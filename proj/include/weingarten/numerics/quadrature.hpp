#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "weingarten/error.hpp"

namespace wg::numerics {

template <typename Scalar>
struct QuadratureTolerance {
  Scalar abs = Scalar(1e-10);
  Scalar rel = Scalar(1e-8);
  int max_depth = 48;
};

namespace detail {

template <typename Scalar, typename F>
Scalar simpson_step(F& f, Scalar a, Scalar fa, Scalar m, Scalar fm, Scalar b, Scalar fb,
                    Scalar whole, Scalar eps, int depth) {
  const Scalar lm = (a + m) / 2, rm = (m + b) / 2;
  const Scalar flm = f(lm), frm = f(rm);
  const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Scalar delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * eps || m - a <= std::abs(a) * Scalar(1e-15))
    return left + right + delta / 15;
  return simpson_step(f, a, fa, lm, flm, m, fm, left, eps / 2, depth - 1) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, eps / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction. The relative part of the
/// tolerance is measured against a 16-panel pre-estimate of the integral.
template <typename Scalar, typename F>
Scalar integrate(F&& f, Scalar a, Scalar b, QuadratureTolerance<Scalar> tol = {}) {
  if (a == b) return Scalar(0);
  constexpr int panels = 16;
  const Scalar h = (b - a) / panels;
  std::vector<Scalar> x(2 * panels + 1), fx(2 * panels + 1);
  for (int i = 0; i <= 2 * panels; ++i) {
    x[i] = (i == 2 * panels) ? b : a + h * i / 2;
    fx[i] = f(x[i]);
  }
  Scalar rough = 0;
  for (int p = 0; p < panels; ++p)
    rough += h / 6 * (fx[2 * p] + 4 * fx[2 * p + 1] + fx[2 * p + 2]);
  const Scalar eps = std::max(tol.abs, tol.rel * std::abs(rough)) / panels;
  Scalar total = 0;
  for (int p = 0; p < panels; ++p) {
    const Scalar whole = h / 6 * (fx[2 * p] + 4 * fx[2 * p + 1] + fx[2 * p + 2]);
    total += detail::simpson_step(f, x[2 * p], fx[2 * p], x[2 * p + 1], fx[2 * p + 1],
                                  x[2 * p + 2], fx[2 * p + 2], whole, eps, tol.max_depth);
  }
  if (!std::isfinite(total))
    throw Error(ErrorKind::Singular, "quadrature produced a non-finite value");
  return total;
}

/// Gauss-Legendre nodes and weights on [-1, 1] via the Golub-Welsch eigenproblem.
template <typename Scalar>
std::pair<Eigen::Array<Scalar, Eigen::Dynamic, 1>, Eigen::Array<Scalar, Eigen::Dynamic, 1>>
gauss_legendre(int n) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const Scalar beta = Scalar(k) / std::sqrt(Scalar(4 * k * k - 1));
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> nodes = eig.eigenvalues().array();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> weights =
      2 * eig.eigenvectors().row(0).transpose().array().square();
  return {nodes, weights};
}

/// Fixed-order rule; smooth in the integration limits, which matters when the
/// result is differenced numerically.
template <typename Scalar>
class GaussLegendre {
 public:
  explicit GaussLegendre(int order = 32) {
    auto [x, w] = gauss_legendre<Scalar>(order);
    nodes_ = x;
    weights_ = w;
  }

  template <typename F>
  Scalar operator()(F&& f, Scalar a, Scalar b) const {
    const Scalar half = (b - a) / 2, mid = (a + b) / 2;
    Scalar sum = 0;
    for (Eigen::Index i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return half * sum;
  }

 private:
  Eigen::Array<Scalar, Eigen::Dynamic, 1> nodes_, weights_;
};

}  // namespace wg::numerics
