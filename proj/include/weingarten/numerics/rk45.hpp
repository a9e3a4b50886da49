#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "weingarten/error.hpp"

namespace wg::numerics {

enum class OdeStop { Reached, BlowUp, DomainExit, StepUnderflow };

template <typename Scalar>
struct OdeOptions {
  Scalar rtol = Scalar(1e-10);
  Scalar atol = Scalar(1e-12);
  Scalar max_step = std::numeric_limits<Scalar>::infinity();
  Scalar blow_up = Scalar(1e12);
};

/// Accepted steps of a scalar ODE solve. Every requested stop is an entry of t.
template <typename Scalar>
struct OdeTrack {
  std::vector<Scalar> t, y, dy;
  OdeStop stop = OdeStop::Reached;
  std::string detail;

  Scalar t_last() const { return t.back(); }

  /// Cubic Hermite dense output between accepted steps.
  Scalar operator()(Scalar s) const { return eval(s, false); }
  Scalar derivative(Scalar s) const { return eval(s, true); }

  bool covers(Scalar s) const {
    const auto [lo, hi] = std::minmax(t.front(), t.back());
    return s >= lo && s <= hi;
  }

 private:
  Scalar eval(Scalar s, bool deriv) const {
    if (!covers(s)) throw Error(ErrorKind::Domain, "dense output queried outside the solved range");
    const bool forward = t.back() >= t.front();
    std::size_t i;
    if (forward)
      i = std::upper_bound(t.begin(), t.end(), s) - t.begin();
    else
      i = std::upper_bound(t.begin(), t.end(), s, std::greater<Scalar>()) - t.begin();
    i = std::clamp<std::size_t>(i, 1, t.size() - 1);
    const Scalar h = t[i] - t[i - 1];
    if (h == 0) return deriv ? dy[i] : y[i];
    const Scalar u = (s - t[i - 1]) / h;
    const Scalar y0 = y[i - 1], y1 = y[i], m0 = h * dy[i - 1], m1 = h * dy[i];
    if (!deriv) {
      const Scalar u2 = u * u, u3 = u2 * u;
      return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y1 +
             (u3 - u2) * m1;
    }
    const Scalar u2 = u * u;
    return ((6 * u2 - 6 * u) * y0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * y1 +
            (3 * u2 - 2 * u) * m1) /
           h;
  }
};

/// Dormand-Prince 5(4) for y' = f(t, y). `stops` is monotone in the direction
/// of integration and ends at the final time; each is hit exactly. The
/// right-hand side may throw wg::Error to signal leaving its domain.
template <typename Scalar, typename Rhs>
OdeTrack<Scalar> dormand_prince(Rhs&& rhs, Scalar t0, Scalar y0, const std::vector<Scalar>& stops,
                                const OdeOptions<Scalar>& opt = {}) {
  static constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5,
                          c5 = Scalar(8) / 9;
  static constexpr Scalar a21 = Scalar(1) / 5;
  static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  static constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187,
                          a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                          a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                          a65 = Scalar(-5103) / 18656;
  static constexpr Scalar b1 = Scalar(35) / 384, b3 = Scalar(500) / 1113, b4 = Scalar(125) / 192,
                          b5 = Scalar(-2187) / 6784, b6 = Scalar(11) / 84;
  static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                          e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                          e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;

  OdeTrack<Scalar> track;
  auto eval = [&](Scalar t, Scalar y, Scalar& out) -> bool {
    try {
      out = rhs(t, y);
    } catch (const Error&) {
      return false;
    }
    return std::isfinite(out);
  };

  Scalar k1;
  if (!eval(t0, y0, k1)) throw Error(ErrorKind::Domain, "right-hand side undefined at the initial point");
  track.t.push_back(t0);
  track.y.push_back(y0);
  track.dy.push_back(k1);
  if (stops.empty()) return track;

  const Scalar dir = stops.back() >= t0 ? Scalar(1) : Scalar(-1);
  Scalar t = t0, y = y0;
  {
    const Scalar sc = opt.atol + opt.rtol * std::abs(y0);
    const Scalar d0 = std::abs(y0) / sc, d1 = std::abs(k1) / sc;
    Scalar h0 = (d0 < 1e-5 || d1 < 1e-5) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
    std::size_t next = 0;
    while (next < stops.size() && (stops[next] - t) * dir <= 0) ++next;
    Scalar h = std::min({h0, opt.max_step, std::abs(stops.back() - t0)});
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();

    while (next < stops.size()) {
      const Scalar target = stops[next];
      bool lands = false;
      Scalar step = h;
      if (step >= std::abs(target - t) * (1 - 4 * eps)) {
        step = std::abs(target - t);
        lands = true;
      }
      if (step <= 16 * eps * std::max(Scalar(1), std::abs(t))) {
        track.stop = OdeStop::StepUnderflow;
        track.detail = "step size underflow";
        return track;
      }
      const Scalar s = dir * step;
      Scalar k2, k3, k4, k5, k6, k7;
      bool ok = eval(t + c2 * s, y + s * (a21 * k1), k2) &&
                eval(t + c3 * s, y + s * (a31 * k1 + a32 * k2), k3) &&
                eval(t + c4 * s, y + s * (a41 * k1 + a42 * k2 + a43 * k3), k4) &&
                eval(t + c5 * s, y + s * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5) &&
                eval(t + s, y + s * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
      Scalar ynew = 0;
      if (ok) {
        ynew = y + s * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        ok = std::isfinite(ynew) && eval(lands ? target : t + s, ynew, k7);
      }
      if (!ok) {
        h = step / 4;
        if (h <= 16 * eps * std::max(Scalar(1), std::abs(t))) {
          track.stop = OdeStop::DomainExit;
          track.detail = "right-hand side left its domain";
          return track;
        }
        continue;
      }
      const Scalar err_abs =
          std::abs(s * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
      const Scalar scale = opt.atol + opt.rtol * std::max(std::abs(y), std::abs(ynew));
      const Scalar err = err_abs / scale;
      if (err > 1) {
        h = step * std::max(Scalar(0.2), Scalar(0.9) * std::pow(err, Scalar(-0.2)));
        continue;
      }
      t = lands ? target : t + s;
      y = ynew;
      k1 = k7;
      track.t.push_back(t);
      track.y.push_back(y);
      track.dy.push_back(k1);
      if (std::abs(y) > opt.blow_up) {
        track.stop = OdeStop::BlowUp;
        track.detail = "solution magnitude exceeded the blow-up threshold";
        return track;
      }
      if (lands) ++next;
      const Scalar grow = err == 0 ? Scalar(5) : std::min(Scalar(5), Scalar(0.9) * std::pow(err, Scalar(-0.2)));
      h = std::min(step * std::max(Scalar(0.2), grow), opt.max_step);
    }
  }
  track.stop = OdeStop::Reached;
  return track;
}

}  // namespace wg::numerics
