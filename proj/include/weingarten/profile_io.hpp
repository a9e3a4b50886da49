#pragma once

#include <map>
#include <string>

#include "weingarten/roc_core.hpp"

namespace wg {

/// The CSV profile layout: theta, r, r1, r2, rho, h plus '#' metadata lines.
struct ProfileTable {
  Column theta, r, r1, r2, rho, h;
  std::map<std::string, std::string> metadata;

  Eigen::Index size() const { return theta.size(); }
};

/// %.17g, with "inf" for the point at infinity.
std::string format_number(double x);
double parse_number(const std::string& text);

/// Table from a profile and its embedding; r = rho sin + h cos.
ProfileTable make_table(const RoCProfile& p, const ProfileCurve3D& curve);
/// RoC profile (samples only) from a table; pole values and tolerance are read
/// from metadata when present.
RoCProfile profile_from_table(const ProfileTable& t);
ProfileCurve3D curve_from_table(const ProfileTable& t);

std::string render_profile_csv(const ProfileTable& t);
ProfileTable parse_profile_csv(const std::string& text);

ProfileTable read_profile_csv(const std::string& path);
void write_profile_csv(const std::string& path, const ProfileTable& t);

/// Writes through a temporary file in the same directory and renames it.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace wg
