#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "weingarten/error.hpp"

namespace wg {

/// A point of the projectively extended real line. Both signed infinities of
/// IEEE arithmetic collapse to the single point at infinity.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  ExtReal(double v) : v_(std::isinf(v) ? std::numeric_limits<double>::infinity() : v) {  // NOLINT
    if (std::isnan(v)) throw Error(ErrorKind::Domain, "NaN is not a point of the extended line");
  }
  static ExtReal infinity() { return ExtReal(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const { return std::isinf(v_); }
  bool is_finite() const { return !is_infinite(); }

  double value() const {
    if (is_infinite()) throw Error(ErrorKind::Singular, "finite value requested from infinity");
    return v_;
  }
  /// +inf stands for the point at infinity.
  double raw() const { return v_; }

  friend bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }

 private:
  double v_ = 0.0;
};

/// (a x + b) / (c x + d) with the one-point conventions; at infinity the
/// result is a/c (b/d when a = c = 0).
inline ExtReal fractional_linear(double a, double b, double c, double d, ExtReal x) {
  if (x.is_infinite()) {
    if (c != 0) return ExtReal(a / c);
    if (a != 0) return ExtReal::infinity();
    if (d == 0) throw Error(ErrorKind::Domain, "0/0 in a fractional-linear map");
    return ExtReal(b / d);
  }
  const double num = a * x.value() + b, den = c * x.value() + d;
  if (den == 0) {
    if (num == 0) throw Error(ErrorKind::Domain, "0/0 in a fractional-linear map");
    return ExtReal::infinity();
  }
  return ExtReal(num / den);
}

inline ExtReal reciprocal(ExtReal x) {
  if (x.is_infinite()) return ExtReal(0.0);
  if (x.value() == 0) return ExtReal::infinity();
  return ExtReal(1.0 / x.value());
}

std::string to_string(ExtReal x);

}  // namespace wg
