#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace wg::cli {

/// Everything a subcommand needs. Round-trips through JSON.
struct RunConfig {
  std::string command;
  std::string relation;

  double theta0 = 1.5707963267948966;
  std::optional<double> r1;
  double lo = 0.0, hi = 3.141592653589793;
  double spacing = 2.5e-4, rtol = 1e-10, atol = 1e-12;
  double pole_seed = 0.0;

  std::string input, output, report;

  std::vector<double> matrix;
  std::optional<double> calibration;
  bool reversed = false;

  int segments = 64;

  std::string lagrangian = "L0";
  double theta1 = 0.3, theta2 = 1.2;
  /// Support value at the anchor angle (theta1) when the trajectory is integrated.
  std::optional<double> support_anchor;

  std::string side = "north";
  double slope_tolerance = 5e-2;
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace wg::cli
