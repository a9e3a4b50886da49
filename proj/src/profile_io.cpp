#include "weingarten/profile_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace wg {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const char* const kColumns[] = {"theta", "r", "r1", "r2", "rho", "h"};

}  // namespace

std::string format_number(double x) {
  if (std::isinf(x)) return "inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf" || t == "-inf" || t == "Infinity")
    return std::numeric_limits<double>::infinity();
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "not a number: '" + t + "'");
  }
  if (used != t.size()) throw Error(ErrorKind::Parse, "trailing characters in number: '" + t + "'");
  return v;
}

ProfileTable make_table(const RoCProfile& p, const ProfileCurve3D& curve) {
  if (curve.grid.size() != p.size()) throw Error(ErrorKind::Precondition, "embedding does not match the profile");
  ProfileTable t;
  t.theta = p.grid();
  t.r1 = p.r1();
  t.r2 = p.r2();
  t.rho = curve.rho;
  t.h = curve.h;
  t.r = curve.rho * p.grid().sin() + curve.h * p.grid().cos();
  t.metadata = p.metadata;
  t.metadata["tolerance"] = format_number(p.tolerance());
  if (p.poles().north) t.metadata["pole_north"] = to_string(*p.poles().north);
  if (p.poles().south) t.metadata["pole_south"] = to_string(*p.poles().south);
  return t;
}

RoCProfile profile_from_table(const ProfileTable& t) {
  PoleValues poles;
  double tol = 1e-8;
  if (auto it = t.metadata.find("pole_north"); it != t.metadata.end()) poles.north = ExtReal(parse_number(it->second));
  if (auto it = t.metadata.find("pole_south"); it != t.metadata.end()) poles.south = ExtReal(parse_number(it->second));
  if (auto it = t.metadata.find("tolerance"); it != t.metadata.end()) tol = parse_number(it->second);
  RoCProfile p(t.theta, t.r1, t.r2, poles, tol);
  p.metadata = t.metadata;
  return p;
}

ProfileCurve3D curve_from_table(const ProfileTable& t) { return {t.theta, t.rho, t.h}; }

std::string render_profile_csv(const ProfileTable& t) {
  std::ostringstream out;
  for (const auto& [key, value] : t.metadata) out << "# " << key << ": " << value << '\n';
  out << "theta,r,r1,r2,rho,h\n";
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    out << format_number(t.theta[i]) << ',' << format_number(t.r[i]) << ',' << format_number(t.r1[i]) << ','
        << format_number(t.r2[i]) << ',' << format_number(t.rho[i]) << ',' << format_number(t.h[i]) << '\n';
  }
  return out.str();
}

ProfileTable parse_profile_csv(const std::string& text) {
  ProfileTable t;
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      const std::string body = trim(s.substr(1));
      const auto colon = body.find(':');
      if (colon != std::string::npos) t.metadata[trim(body.substr(0, colon))] = trim(body.substr(colon + 1));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!header_seen) {
      header_seen = true;
      bool is_header = cells.size() == 6;
      for (std::size_t k = 0; is_header && k < 6; ++k) is_header = cells[k] == kColumns[k];
      if (is_header) continue;
      if (!cells.empty() && cells[0] == "theta")
        throw Error(ErrorKind::Parse, "unexpected CSV columns (want theta,r,r1,r2,rho,h)");
    }
    if (cells.size() != 6)
      throw Error(ErrorKind::Parse, "CSV line " + std::to_string(line_no) + " does not have 6 columns");
    std::vector<double> row(6);
    for (std::size_t k = 0; k < 6; ++k) row[k] = parse_number(cells[k]);
    rows.push_back(row);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Column* cols[] = {&t.theta, &t.r, &t.r1, &t.r2, &t.rho, &t.h};
  for (auto* c : cols) c->resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < 6; ++k) (*cols[k])[i] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  return t;
}

ProfileTable read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Precondition, "cannot open profile '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_profile_csv(buf.str());
}

void write_profile_csv(const std::string& path, const ProfileTable& t) { atomic_write(path, render_profile_csv(t)); }

void atomic_write(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Precondition, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::Precondition, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

}  // namespace wg
