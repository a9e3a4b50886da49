#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "run_config.hpp"
#include "weingarten/error.hpp"

namespace {

using wg::cli::RunConfig;

/// Flags shared by every subcommand; the config file is applied first and any
/// flag given on the command line wins.
struct Flags {
  RunConfig c;
  std::string config_path;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON run configuration");
  sub->add_option("--relation", f.c.relation, "Weingarten relation, e.g. 'r2 = 2*r1 + 1'");
  sub->add_option("--input", f.c.input, "profile CSV");
  sub->add_option("--output", f.c.output, "output file (CSV or OBJ)");
  sub->add_option("--report", f.c.report, "write the JSON report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotational Weingarten surfaces through their radius-of-curvature diagram"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* parse = app.add_subcommand("parse", "parse and classify a relation");
  CLI::App* integrate = app.add_subcommand("integrate", "integrate a profile from an initial condition");
  CLI::App* transform = app.add_subcommand("transform", "apply an SL2(R) action to a profile");
  CLI::App* classify = app.add_subcommand("classify", "semi-quadratic invariants and umbilic data");
  CLI::App* reduce = app.add_subcommand("reduce", "reduce a semi-quadratic relation to k2 = lambda k1");
  CLI::App* variational = app.add_subcommand("variational", "Lagrangian checks along a trajectory");
  CLI::App* mesh = app.add_subcommand("export-mesh", "revolve a profile into an OBJ mesh");
  CLI::App* report = app.add_subcommand("report", "summarize a profile CSV");
  for (CLI::App* s : {parse, integrate, transform, classify, reduce, variational, mesh, report}) add_common(s, f);

  double r1 = 0, calibration = 0, support_anchor = 0;
  for (CLI::App* s : {integrate, variational}) {
    s->add_option("--theta0", f.c.theta0, "start angle");
    s->add_option("--r1", r1, "r1 at theta0");
    s->add_option("--spacing", f.c.spacing, "maximum grid spacing");
  }
  integrate->add_option("--lo", f.c.lo);
  integrate->add_option("--hi", f.c.hi);
  integrate->add_option("--rtol", f.c.rtol);
  integrate->add_option("--atol", f.c.atol);
  integrate->add_option("--pole-seed", f.c.pole_seed, "linearized seed coefficient at a pole start");
  for (CLI::App* s : {integrate, report}) s->add_option("--side", f.c.side, "north or south");
  integrate->add_option("--slope-tolerance", f.c.slope_tolerance);

  transform->add_option("--matrix", f.c.matrix, "a,b,c,d with ad - bc = 1")->delimiter(',')->expected(4);
  transform->add_option("--calibration", calibration, "calibration constant A");
  transform->add_flag("--reversed", f.c.reversed, "orientation-reversed branch");

  mesh->add_option("--segments", f.c.segments)->check(CLI::Range(3, 1 << 20));

  variational->add_option("--lagrangian", f.c.lagrangian, "L0, L1 or cubic");
  variational->add_option("--theta1", f.c.theta1);
  variational->add_option("--theta2", f.c.theta2);
  variational->add_option("--support-anchor", support_anchor, "support value r(theta1)");
  variational->add_option("--seed", f.c.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wg::cli::kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  RunConfig c;
  if (!f.config_path.empty()) {
    try {
      c = wg::cli::load_config(f.config_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return wg::cli::kUsage;
    }
  }
  c.command = chosen->get_name();

  // Only flags actually present override the config.
  auto given = [&](const char* name) {
    const CLI::Option* o = chosen->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  if (given("--relation")) c.relation = f.c.relation;
  if (given("--input")) c.input = f.c.input;
  if (given("--output")) c.output = f.c.output;
  if (given("--report")) c.report = f.c.report;
  if (given("--theta0")) c.theta0 = f.c.theta0;
  if (given("--r1")) c.r1 = r1;
  if (given("--spacing")) c.spacing = f.c.spacing;
  if (given("--lo")) c.lo = f.c.lo;
  if (given("--hi")) c.hi = f.c.hi;
  if (given("--rtol")) c.rtol = f.c.rtol;
  if (given("--atol")) c.atol = f.c.atol;
  if (given("--pole-seed")) c.pole_seed = f.c.pole_seed;
  if (given("--side")) c.side = f.c.side;
  if (given("--slope-tolerance")) c.slope_tolerance = f.c.slope_tolerance;
  if (given("--matrix")) c.matrix = f.c.matrix;
  if (given("--calibration")) c.calibration = calibration;
  if (given("--reversed")) c.reversed = f.c.reversed;
  if (given("--segments")) c.segments = f.c.segments;
  if (given("--lagrangian")) c.lagrangian = f.c.lagrangian;
  if (given("--theta1")) c.theta1 = f.c.theta1;
  if (given("--theta2")) c.theta2 = f.c.theta2;
  if (given("--support-anchor")) c.support_anchor = support_anchor;
  if (given("--seed")) c.seed = f.c.seed;

  try {
    return wg::cli::run(c, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wg::cli::kNumeric;
  }
}
