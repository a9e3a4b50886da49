#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

#include "weingarten/error.hpp"
#include "weingarten/integrator.hpp"
#include "weingarten/mesh.hpp"
#include "weingarten/mobius.hpp"
#include "weingarten/profile_io.hpp"
#include "weingarten/semiquadratic.hpp"
#include "weingarten/variational.hpp"

namespace wg::cli {
namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

json base_report(const RunConfig& c) { return {{"schema", 1}, {"command", c.command}, {"config", to_json(c)}}; }

json number(double x) { return std::isfinite(x) ? json(x) : json(to_string(ExtReal(x))); }

json ext(const ExtReal& x) { return x.is_finite() ? json(x.value()) : json("inf"); }

Pole side_of(const RunConfig& c) {
  if (c.side == "north") return Pole::North;
  if (c.side == "south") return Pole::South;
  throw Error(ErrorKind::Precondition, "side must be 'north' or 'south'");
}

WeingartenRelation relation_of(const RunConfig& c) {
  if (c.relation.empty()) throw Error(ErrorKind::Precondition, "--relation is required");
  return parse_relation(c.relation);
}

SemiQuadratic semi_quadratic_of(const WeingartenRelation& rel) {
  const std::optional<SemiQuadratic> q = k_coefficients(rel);
  if (!q) throw Error(ErrorKind::Parse, "not semi-quadratic: " + render(rel));
  return *q;
}

json coefficients(const SemiQuadratic& q) {
  return {{"alpha", q.alpha}, {"beta", q.beta}, {"gamma", q.gamma}, {"delta", q.delta}};
}

json matrix_json(const Moebius& M) { return json::array({M.a(), M.b(), M.c(), M.d()}); }

json factors_json(const Moebius& M) {
  json out = json::array();
  for (const Factor& f : decompose(M)) out.push_back(f.label());
  return out;
}

ProfileTable input_table(const RunConfig& c) {
  if (c.input.empty()) throw Error(ErrorKind::Precondition, "--input is required");
  ProfileTable t = read_profile_csv(c.input);
  if (t.size() == 0) throw Error(ErrorKind::Precondition, "profile '" + c.input + "' is empty");
  return t;
}

json umbilic_json(const RoCProfile& p, Pole side) {
  try {
    const UmbilicAnalysis u = umbilic_slope_estimate(p, side);
    json out = {{"r0", ext(u.r0)},
                {"slope", number(u.slope_estimate)},
                {"ci", number(u.slope_ci)},
                {"curvature_slope", number(u.curvature_slope)},
                {"alpha", number(u.vanishing_exponent)},
                {"alpha_ci", number(u.vanishing_exponent_ci)},
                {"gamma", number(u.vanishing_coefficient)},
                {"unbounded", u.unbounded},
                {"levels", u.levels_used}};
    switch (u.coefficient_growth) {
      case numerics::Growth::Zero: out["gamma_growth"] = "zero"; break;
      case numerics::Growth::Finite: out["gamma_growth"] = "finite"; break;
      case numerics::Growth::Divergent: out["gamma_growth"] = "divergent"; break;
    }
    return out;
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

/// Embedding where possible, otherwise rho = r1 sin(theta) with h unknown.
ProfileCurve3D curve_or_partial(const RoCProfile& p) {
  try {
    return embed_profile(p, 0.0);
  } catch (const Error&) {
    ProfileCurve3D out{p.grid(), p.r1() * p.grid().sin(), Column::Constant(p.size(), std::nan(""))};
    return out;
  }
}

void write_or_stash(const RunConfig& c, const std::string& text, CommandResult& r) {
  if (c.output.empty())
    r.payload = text;
  else
    atomic_write(c.output, text);
}

}  // namespace

CommandResult cmd_parse(const RunConfig& c) {
  CommandResult r;
  const WeingartenRelation rel = relation_of(c);
  r.report = base_report(c);
  r.report["relation"] = render(rel);
  r.report["family"] = family_name(rel);
  if (const auto q = k_coefficients(rel)) r.report["coefficients"] = coefficients(*q);
  json fixed = json::array();
  try {
    for (double u : fixed_points(rel, -10.0, 10.0)) fixed.push_back(u);
  } catch (const Error&) {
  }
  r.report["fixed_points_in_window"] = fixed;
  return r;
}

CommandResult cmd_integrate(const RunConfig& c) {
  CommandResult r;
  const WeingartenRelation rel = relation_of(c);
  if (!c.r1) throw Error(ErrorKind::Precondition, "--r1 is required");
  StepControl control;
  control.rtol = c.rtol;
  control.atol = c.atol;
  control.max_spacing = c.spacing;
  control.pole_seed = c.pole_seed;
  const Integration in = integrate_cm(rel, c.theta0, *c.r1, c.lo, c.hi, control);
  const RoCProfile& p = in.profile;
  write_or_stash(c, render_profile_csv(make_table(p, curve_or_partial(p))), r);

  r.report = base_report(c);
  r.report["relation"] = render(rel);
  r.report["start"] = {{"theta0", in.theta0}, {"r1", in.r1_0}};
  r.report["stop_reason"] = {{"lower", to_string(in.lower.stop)},
                             {"lower_theta", in.lower.theta_end},
                             {"upper", to_string(in.upper.stop)},
                             {"upper_theta", in.upper.theta_end}};
  r.report["grid_stats"] = {{"samples", p.size()},
                            {"theta_min", p.grid()[0]},
                            {"theta_max", p.grid()[p.size() - 1]},
                            {"accepted_steps", in.accepted_steps}};
  r.report["umbilic"] = umbilic_json(p, side_of(c));
  r.report["residual_max"] = number(in.residual_max);
  r.report["residual_window"] = {in.residual_window.first, in.residual_window.second};
  return r;
}

CommandResult cmd_transform(const RunConfig& c) {
  CommandResult r;
  if (c.matrix.size() != 4) throw Error(ErrorKind::Precondition, "--matrix needs four entries a,b,c,d");
  const double det = c.matrix[0] * c.matrix[3] - c.matrix[1] * c.matrix[2];
  if (std::abs(det - 1) > 1e-12) throw Error(ErrorKind::Precondition, "matrix determinant must be 1");
  const Moebius M(c.matrix[0], c.matrix[1], c.matrix[2], c.matrix[3]);
  const ProfileTable table = input_table(c);
  const RoCProfile p = profile_from_table(table);
  const ProfileCurve3D curve = curve_from_table(table);

  std::optional<Calibration> cal;
  if (c.calibration) cal = Calibration(*c.calibration);
  ReparamOptions options;
  options.reversed = c.reversed;
  const InducedSurface image = induced_surface(M, p, curve, cal, options);

  r.report = base_report(c);
  r.report["matrix"] = matrix_json(M);
  r.report["factors"] = factors_json(M);
  switch (image.kind) {
    case ImageKind::Plane: r.report["kind"] = "plane"; return r;
    case ImageKind::Cone:
      r.report["kind"] = "cone";
      r.report["cone_angle"] = image.cone_angle;
      return r;
    case ImageKind::Regular: r.report["kind"] = "regular"; break;
  }
  const RoCProfile& q = *image.profile;
  const Reparameterization& rp = image.reparam;
  write_or_stash(c, render_profile_csv(make_table(q, image.curve)), r);
  r.report["calibration"] = rp.calibration.value();
  r.report["admissible"] = {{"theta_first", p.grid()[rp.first]}, {"theta_last", p.grid()[rp.last]},
                            {"samples", rp.last - rp.first + 1}};
  r.report["saturation"] = rp.saturation ? json(*rp.saturation) : json(nullptr);
  r.report["samples"] = q.size();
  r.report["cm_residual_max"] = number(cm_residual_sup(q));
  return r;
}

CommandResult cmd_classify(const RunConfig& c) {
  CommandResult r;
  const WeingartenRelation rel = relation_of(c);
  const SemiQuadratic q = semi_quadratic_of(rel);
  const SemiQuadraticInvariants inv = invariants(q);
  r.report = base_report(c);
  r.report["relation"] = render(rel);
  r.report["coefficients"] = coefficients(q);
  r.report["class"] = to_string(inv.cls);
  r.report["lambda1"] = inv.lambda1;
  r.report["lambda2"] = inv.lambda2;
  r.report["ratio"] = inv.ratio ? json(*inv.ratio) : json(nullptr);
  r.report["linear_weingarten"] = inv.lambda1 == 0;
  const UmbilicCurvatures uc = umbilic_curvatures(q);
  r.report["umbilic_curvatures"] = uc.k;
  if (!uc.reason.empty()) r.report["umbilic_note"] = uc.reason;
  if (inv.lambda2 >= 0) {
    const UmbilicSlopes s = umbilic_slope_formula(q);
    r.report["umbilic_slopes"] = {{"plus", number(s.plus)}, {"minus", number(s.minus)}, {"degenerate", s.degenerate}};
  }
  if (inv.lambda2 > 0) {
    const Reduction red = reduce_to_pure_linear(q);
    if (red.parabolic) {
      r.report["reduction"] = {{"parabolic", true}, {"note", "canal surface; classify a profile with reduce --input"}};
    } else {
      r.report["reduction"] = {{"lambda", red.lambda}, {"matrix", matrix_json(red.M)}};
    }
  }
  return r;
}

CommandResult cmd_reduce(const RunConfig& c) {
  CommandResult r;
  const WeingartenRelation rel = relation_of(c);
  const SemiQuadratic q = semi_quadratic_of(rel);
  const Reduction red = reduce_to_pure_linear(q);
  r.report = base_report(c);
  r.report["relation"] = render(rel);
  if (red.parabolic) {
    r.report["parabolic"] = true;
    if (!c.input.empty()) {
      const RoCProfile p = profile_from_table(input_table(c));
      r.report["canal_class"] = to_string(canal_classify(q, p));
    } else {
      r.report["note"] = "parabolic relation: pass --input with a profile to classify the canal surface";
    }
    return r;
  }
  const SemiQuadratic image = transform_coefficients(red.M, normalize(q));
  r.report["parabolic"] = false;
  r.report["lambda"] = red.lambda;
  r.report["target"] = coefficients(red.target);
  r.report["matrix"] = matrix_json(red.M);
  r.report["factors"] = factors_json(red.M);
  r.report["image_coefficients"] = coefficients(image);
  r.report["elliptic"] = red.lambda < 0;
  return r;
}

CommandResult cmd_variational(const RunConfig& c) {
  CommandResult r;
  const WeingartenRelation rel = relation_of(c);
  LagrangianSpec spec;
  if (c.lagrangian == "L0")
    spec = LagrangianSpec::l0();
  else if (c.lagrangian == "L1" || c.lagrangian == "HopfL1")
    spec = LagrangianSpec::hopf_l1();
  else if (c.lagrangian == "cubic" || c.lagrangian == "CubicL1")
    spec = LagrangianSpec::cubic_l1();
  else
    throw Error(ErrorKind::Precondition, "--lagrangian must be L0, L1 or cubic");
  if (!(c.theta1 > 0 && c.theta2 < kPi && c.theta1 < c.theta2))
    throw Error(ErrorKind::Precondition, "need 0 < theta1 < theta2 < pi");
  if (spec.kind == LagrangianKind::L0 && c.theta1 <= kPi / 2 && c.theta2 >= kPi / 2)
    throw Error(ErrorKind::Domain, "L0 interval must not contain pi/2");

  std::optional<SupportProfile> support;
  if (!c.input.empty()) {
    const ProfileTable t = input_table(c);
    support.emplace(t.theta, t.r);
  } else {
    if (!c.r1) throw Error(ErrorKind::Precondition, "--r1 (or --input) is required");
    const double lo = std::max(1e-3, std::min(c.theta0, c.theta1) - 0.02);
    const double hi = std::min(kPi - 1e-3, std::max(c.theta0, c.theta2) + 0.02);
    StepControl control;
    control.max_spacing = c.spacing;
    const Integration in = integrate_cm(rel, c.theta0, *c.r1, lo, hi, control);
    const double anchor = std::abs(std::cos(c.theta1)) > 1e-6 ? c.theta1 : c.theta2;
    const double value = c.support_anchor.value_or(in.profile.at(anchor).r1.value());
    support.emplace(support_from_r1(in.profile, anchor, value));
  }

  const int n = 41;
  Column thetas = Column::LinSpaced(n, c.theta1, c.theta2);
  const SupportJet j1 = support->jet(c.theta1);
  const Multiplier m(rel, VariationalState(c.theta1, j1.r, j1.rdot).r1());

  r.report = base_report(c);
  r.report["relation"] = render(rel);
  r.report["lagrangian_kind"] = to_string(spec.kind);
  const ElResidual el = euler_lagrange_residual(spec, m, *support, thetas);
  r.report["el_residual_max"] = el.max_difference;
  double helm = 0;
  for (double t : thetas) {
    const SupportJet j = support->jet(t);
    try {
      helm = std::max(helm, std::abs(helmholtz_residual(m, spec, VariationalState(t, j.r, j.rdot), j.rddot)));
    } catch (const Error&) {
    }
  }
  r.report["helmholtz_residual_max"] = helm;
  try {
    const DriftReport d = conservation_drift(m, *support, thetas);
    r.report["I_drift"] = d.I_drift;
    r.report["Q_drift"] = d.Q_drift;
  } catch (const Error& e) {
    r.report["I_drift"] = nullptr;
    r.report["Q_drift"] = nullptr;
    r.report["drift_note"] = e.what();
  }
  const StabilityReport st = stability_suite(spec, m, *support, c.theta1, c.theta2, c.seed);
  r.report["second_variation"] = {{"min", st.min}, {"argmin_basis_index", st.argmin}};
  if (spec.kind == LagrangianKind::L0) r.report["second_variation"]["identity_gap"] = st.identity_gap;
  return r;
}

CommandResult cmd_export_mesh(const RunConfig& c) {
  CommandResult r;
  const ProfileTable t = input_table(c);
  const Mesh mesh = revolve_profile(curve_from_table(t), c.segments);
  if (mesh.skipped_rows > 0)
    r.warnings = "warning: skipped " + std::to_string(mesh.skipped_rows) + " profile rows with infinite radii\n";
  write_or_stash(c, render_obj(mesh), r);
  const MeshTopology topo = mesh_topology(mesh);
  r.report = base_report(c);
  r.report["vertices"] = topo.vertices;
  r.report["faces"] = topo.faces;
  r.report["edges"] = topo.edges;
  r.report["euler_characteristic"] = topo.euler();
  r.report["watertight"] = topo.watertight();
  r.report["boundary_loops"] = topo.boundary_loops;
  r.report["skipped_rows"] = mesh.skipped_rows;
  return r;
}

CommandResult cmd_report(const RunConfig& c) {
  CommandResult r;
  const RoCProfile p = profile_from_table(input_table(c));
  r.report = base_report(c);
  r.report["samples"] = p.size();
  r.report["theta_range"] = {p.grid()[0], p.grid()[p.size() - 1]};
  r.report["cm_residual_max"] = number(cm_residual_sup(p));
  const InteriorUmbilics iu = interior_umbilics(p);
  r.report["interior_umbilics"] = {{"crossings", iu.crossings}, {"rings", iu.rings}};
  r.report["umbilic"] = {{"north", umbilic_json(p, Pole::North)}, {"south", umbilic_json(p, Pole::South)}};
  r.report["metadata"] = p.metadata;
  return r;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  CommandResult r;
  try {
    if (c.command == "parse") r = cmd_parse(c);
    else if (c.command == "integrate") r = cmd_integrate(c);
    else if (c.command == "transform") r = cmd_transform(c);
    else if (c.command == "classify") r = cmd_classify(c);
    else if (c.command == "reduce") r = cmd_reduce(c);
    else if (c.command == "variational") r = cmd_variational(c);
    else if (c.command == "export-mesh") r = cmd_export_mesh(c);
    else if (c.command == "report") r = cmd_report(c);
    else throw Error(ErrorKind::Precondition, "unknown command '" + c.command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Parse:
      case ErrorKind::Precondition: return kUsage;
      case ErrorKind::Domain:
      case ErrorKind::EmptyDomain: return kInadmissible;
      default: return kNumeric;
    }
  }
  err << r.warnings;
  const std::string text = r.report.dump(2) + "\n";
  if (!r.payload.empty()) {
    // Payload on stdout, so the report goes to its file or stderr.
    out << r.payload;
    if (c.report.empty())
      err << text;
    else
      atomic_write(c.report, text);
  } else if (c.report.empty()) {
    out << text;
  } else {
    atomic_write(c.report, text);
  }
  return r.exit;
}

}  // namespace wg::cli
