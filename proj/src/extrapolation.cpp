#include "weingarten/numerics/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace wg::numerics {
namespace {

double log_variable(double d) { return 1.0 / std::log(2.0 / std::sin(d)); }

double quadratic_at(const double* t, const double* q, double x) {
  double sum = 0;
  for (int i = 0; i < 3; ++i) {
    double w = 1;
    for (int j = 0; j < 3; ++j)
      if (j != i) w *= (x - t[j]) / (t[i] - t[j]);
    sum += w * q[i];
  }
  return sum;
}

std::optional<double> aitken(double q0, double q1, double q2) {
  const double d1 = q1 - q0, d2 = q2 - q1;
  if (d2 == 0) return q2;
  if (d1 == 0) return std::nullopt;
  const double rho = d2 / d1;
  if (!(std::abs(rho) < 0.98)) return std::nullopt;
  return q2 + d2 * rho / (1 - rho);
}

}  // namespace

LimitEstimate extrapolate_limit(std::span<const double> q, std::span<const double> d) {
  const std::size_t n = std::min(q.size(), d.size());
  LimitEstimate out;
  if (n == 0) {
    out.value = std::numeric_limits<double>::quiet_NaN();
    out.ci = std::numeric_limits<double>::infinity();
    return out;
  }
  if (n < 3) {
    out.value = q[n - 1];
    out.ci = n == 2 ? std::abs(q[1] - q[0]) : std::numeric_limits<double>::infinity();
    return out;
  }
  double scale = 0;
  for (std::size_t i = n - 3; i < n; ++i) scale = std::max(scale, std::abs(q[i]));
  const double floor = 1e-13 * std::max(scale, 1e-300);
  if (std::abs(q[n - 1] - q[n - 2]) <= floor && std::abs(q[n - 2] - q[n - 3]) <= floor) {
    out.value = q[n - 1];
    out.ci = floor;
    out.model = LimitModel::Converged;
    return out;
  }

  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = log_variable(d[i]);
  auto geometric = [&](std::size_t j) { return aitken(q[j - 2], q[j - 1], q[j]); };
  auto logarithmic = [&](std::size_t j) { return quadratic_at(&t[j - 2], &q[j - 2], 0.0); };

  bool use_geometric = geometric(n - 1).has_value();
  if (n >= 4 && use_geometric) {
    const double d_old = q[n - 3] - q[n - 4], d_new = q[n - 2] - q[n - 3];
    const double geo_pred = d_old == 0 ? q[n - 2] : q[n - 2] + d_new * (d_new / d_old);
    const double log_pred = quadratic_at(&t[n - 4], &q[n - 4], t[n - 1]);
    use_geometric = std::abs(geo_pred - q[n - 1]) <= std::abs(log_pred - q[n - 1]);
  }
  if (use_geometric) {
    out.model = LimitModel::Geometric;
    out.value = *geometric(n - 1);
    const auto prev = n >= 4 ? geometric(n - 2) : std::optional<double>(q[n - 1]);
    out.ci = prev ? std::abs(out.value - *prev) : std::abs(out.value - q[n - 1]);
  } else {
    out.model = LimitModel::Logarithmic;
    out.value = logarithmic(n - 1);
    out.ci = n >= 4 ? std::abs(out.value - logarithmic(n - 2)) : std::abs(out.value - q[n - 1]);
  }
  out.ci = std::max(out.ci, floor);
  return out;
}

Growth classify_growth(std::span<const double> q, std::span<const double> d) {
  const std::size_t n = std::min(q.size(), d.size());
  if (n == 0) return Growth::Zero;
  if (q[n - 1] == 0) return Growth::Zero;
  if (n < 3) return Growth::Finite;

  int doubling = 0, halving = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double ratio = std::abs(q[i] / q[i - 1]);
    doubling = ratio > 2 ? doubling + 1 : 0;
    halving = ratio < 0.5 ? halving + 1 : 0;
  }
  if (doubling >= 3) return Growth::Divergent;
  if (halving >= 3) return Growth::Zero;

  double eta = 0;
  int count = 0;
  for (std::size_t i = std::max<std::size_t>(1, n - 3); i < n; ++i) {
    if (q[i] == 0 || q[i - 1] == 0) return Growth::Zero;
    const double l0 = std::log(std::log(2 / std::sin(d[i - 1])));
    const double l1 = std::log(std::log(2 / std::sin(d[i])));
    eta += (std::log(std::abs(q[i])) - std::log(std::abs(q[i - 1]))) / (l1 - l0);
    ++count;
  }
  eta /= count;
  if (eta > 0.5) return Growth::Divergent;
  if (eta < -0.5) return Growth::Zero;
  return Growth::Finite;
}

}  // namespace wg::numerics
