#pragma once

#include "lmcf/geometry.hpp"
#include "lmcf/linking.hpp"
#include "lmcf/plane_pair.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lmcf {

// Analytic test object with closed-form reference data.
struct Fixture {
  std::string name;
  nlohmann::json params;  // effective parameters, defaults filled in
  std::string object;     // what the fixture realizes
  std::optional<DiscreteCurve> curve;
  std::optional<PlanePairConfig> pair;
  std::vector<SurfaceMesh> surfaces;
  std::vector<std::vector<Vec4>> loops;  // closed curves in S^3
  std::vector<AffineLine> limit_lines;   // oriented limit lines of curve fixtures
  std::optional<CoordinateFrame> frame;  // curve fixtures: e_z, e_w in R^2
  std::map<std::string, ScalarField> reference;
  // Identity checks run at generation: name -> max deviation, and the tolerance it must meet.
  std::map<std::string, std::pair<double, double>> audit;

  bool audit_ok() const;
};

struct FixtureInfo {
  std::string name;
  std::string object;
  nlohmann::json defaults;
};

const std::vector<FixtureInfo>& fixture_catalog();

// Grim Reaper y = -log cos x in arclength: s -> (atan(sinh s), log cosh s), stable for large |s|.
Vec2 grim_reaper_point(double s);
// D_scale of the translating Grim Reaper at time t: scale * GR(s) + (0, t / scale), with s uniform
// in [-s_max, s_max]. Vertices keep their arclength parameter (rigid sampling).
DiscreteCurve grim_reaper_curve(double s_max, int n, double t = 0.0, double scale = 1.0);

// Throws UnknownFixture for an unknown name, InvalidArgument for unknown parameter keys or values
// out of range.
Fixture generate_fixture(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

// Mesh text format:
//   # lmcf-surface v1
//   v,x1,y1,x2,y2        (one line per vertex)
//   t,i,j,k              (one line per oriented triangle, 0-based)
void write_surface(std::ostream& out, const SurfaceMesh& mesh);
SurfaceMesh read_surface(std::istream& in);

// Writes <dir>/<name>.json (parameters, object, audit, limit lines, frame) plus the geometry:
// <name>.curve.csv, <name>.surface<k>.csv, <name>.loop<k>.csv. Returns the files written.
std::vector<std::string> save_fixture(const Fixture& f, const std::string& dir);

}  // namespace lmcf
