#pragma once

#include <cstddef>
#include <span>

namespace wg::numerics {

enum class LimitModel { Converged, Geometric, Logarithmic, Insufficient };

struct LimitEstimate {
  double value = 0;
  double ci = 0;  // half-width from successive extrapolants
  LimitModel model = LimitModel::Insufficient;
};

/// Limit of q_k as the pole distance d_k = theta_ref 2^-k shrinks. Two error
/// models compete: a geometric one (power-law corrections, Aitken/Richardson)
/// and a quadratic in 1/ln(2/sin d) for logarithmic corrections. The model that
/// better predicts the newest sample from the older ones wins.
LimitEstimate extrapolate_limit(std::span<const double> q, std::span<const double> pole_distance);

enum class Growth { Zero, Finite, Divergent };

/// Decides whether |q_k| tends to zero, a finite nonzero value or infinity,
/// using the exponent of q against ln(2/sin d) and a run of >2x growth.
Growth classify_growth(std::span<const double> q, std::span<const double> pole_distance);

}  // namespace wg::numerics
