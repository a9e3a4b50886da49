#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "weingarten/error.hpp"

namespace wg::cli {
namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

template <typename T>
void read(const nlohmann::json& j, const char* key, std::optional<T>& field) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    field.reset();
  else
    field = j.at(key).get<T>();
}

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"command", c.command},
      {"relation", c.relation},
      {"theta0", c.theta0},
      {"r1", opt(c.r1)},
      {"lo", c.lo},
      {"hi", c.hi},
      {"spacing", c.spacing},
      {"rtol", c.rtol},
      {"atol", c.atol},
      {"pole_seed", c.pole_seed},
      {"input", c.input},
      {"output", c.output},
      {"report", c.report},
      {"matrix", c.matrix},
      {"calibration", opt(c.calibration)},
      {"reversed", c.reversed},
      {"segments", c.segments},
      {"lagrangian", c.lagrangian},
      {"theta1", c.theta1},
      {"theta2", c.theta2},
      {"support_anchor", opt(c.support_anchor)},
      {"side", c.side},
      {"slope_tolerance", c.slope_tolerance},
      {"seed", c.seed},
  };
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "config must be a JSON object");
  static const char* known[] = {"command", "relation", "theta0",   "r1",     "lo",         "hi",
                                "spacing", "rtol",     "atol",     "pole_seed", "input",   "output",
                                "report",  "matrix",   "calibration", "reversed", "segments", "lagrangian",
                                "theta1",  "theta2",   "support_anchor", "side", "slope_tolerance", "seed",
                                "schema"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw Error(ErrorKind::Parse, "unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    read(j, "command", c.command);
    read(j, "relation", c.relation);
    read(j, "theta0", c.theta0);
    read(j, "r1", c.r1);
    read(j, "lo", c.lo);
    read(j, "hi", c.hi);
    read(j, "spacing", c.spacing);
    read(j, "rtol", c.rtol);
    read(j, "atol", c.atol);
    read(j, "pole_seed", c.pole_seed);
    read(j, "input", c.input);
    read(j, "output", c.output);
    read(j, "report", c.report);
    read(j, "matrix", c.matrix);
    read(j, "calibration", c.calibration);
    read(j, "reversed", c.reversed);
    read(j, "segments", c.segments);
    read(j, "lagrangian", c.lagrangian);
    read(j, "theta1", c.theta1);
    read(j, "theta2", c.theta2);
    read(j, "support_anchor", c.support_anchor);
    read(j, "side", c.side);
    read(j, "slope_tolerance", c.slope_tolerance);
    read(j, "seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Precondition, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace wg::cli
