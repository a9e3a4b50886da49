#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "weingarten/error.hpp"

namespace wg::numerics {

/// Bisection on a sign-changing bracket.
template <typename Scalar, typename F>
Scalar bisect(F&& f, Scalar a, Scalar b, Scalar xtol = Scalar(1e-12), int max_iter = 200) {
  Scalar fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) throw Error(ErrorKind::Domain, "bisection bracket has no sign change");
  for (int it = 0; it < max_iter && std::abs(b - a) > xtol * std::max(Scalar(1), std::abs(a)); ++it) {
    const Scalar m = a + (b - a) / 2;
    const Scalar fm = f(m);
    if (fm == 0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return a + (b - a) / 2;
}

/// Roots of f on [a, b] located by a sign scan on `subdivisions` cells, each
/// refined by bisection. Sign changes across poles are filtered by `accept`.
template <typename Scalar, typename F, typename Accept>
std::vector<Scalar> sign_scan_roots(F&& f, Scalar a, Scalar b, int subdivisions, Accept&& accept,
                                    Scalar xtol = Scalar(1e-12)) {
  std::vector<Scalar> roots;
  auto safe = [&](Scalar x) -> std::optional<Scalar> {
    try {
      const Scalar v = f(x);
      if (std::isnan(v)) return std::nullopt;
      return v;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  Scalar x_prev = a;
  std::optional<Scalar> f_prev = safe(a);
  for (int i = 1; i <= subdivisions; ++i) {
    const Scalar x = (i == subdivisions) ? b : a + (b - a) * i / subdivisions;
    const std::optional<Scalar> fx = safe(x);
    if (f_prev && *f_prev == 0) {
      if (roots.empty() || roots.back() != x_prev) roots.push_back(x_prev);
    } else if (f_prev && fx && std::isfinite(*f_prev) && std::isfinite(*fx) && *fx != 0 &&
               ((*f_prev > 0) != (*fx > 0))) {
      try {
        const Scalar r = bisect(f, x_prev, x, xtol);
        if (accept(r)) roots.push_back(r);
      } catch (const Error&) {
      }
    }
    if (i == subdivisions && fx && *fx == 0) roots.push_back(x);
    x_prev = x;
    f_prev = fx;
  }
  return roots;
}

}  // namespace wg::numerics
