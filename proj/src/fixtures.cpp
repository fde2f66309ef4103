#include "lmcf/fixtures.hpp"

#include "lmcf/curve_io.hpp"
#include "lmcf/error.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace lmcf {

using nlohmann::json;

bool Fixture::audit_ok() const {
  for (const auto& [name, check] : audit)
    if (!(check.first <= check.second)) return false;
  return true;
}

const std::vector<FixtureInfo>& fixture_catalog() {
  static const std::vector<FixtureInfo> catalog = {
      {"line", "static line: plane of density one", {{"angle", 0.0}, {"half_length", 4.0}, {"N", 81}, {"offset", {0.0, 0.0}}}},
      {"circle", "round circle: the shrinking self-similar solution", {{"r", 1.0}, {"N", 256}}},
      {"grim-reaper", "Grim Reaper y = -log cos x: translator with w = theta",
       {{"delta", 0.05}, {"N", 512}, {"t", 0.0}}},
      {"line-pair", "two lines through the origin: n = 1 plane pair",
       {{"angle1", pi / 4}, {"angle2", -pi / 4}, {"half_length", 4.0}, {"N", 81}}},
      {"smoothed-pair", "line pair with normal bumps sigma exp(-s^2): near-plane-pair geometry",
       {{"angle1", pi / 4}, {"angle2", -pi / 4}, {"half_length", 5.0}, {"N", 201}, {"sigma", 0.1}}},
      {"plane-pair-m1", "Lagrangian planes in C^2 meeting along a line",
       {{"theta1", pi / 4}, {"theta2", -pi / 4}, {"half_width", 3.0}, {"samples", 25}}},
      {"plane-pair-m0", "transverse Lagrangian planes in C^2",
       {{"theta1", 0.0}, {"theta2", pi}, {"half_width", 3.0}, {"samples", 25}}},
      {"tilted-pair", "graphs w = phi + lambda b_j z over an m = 1 pair",
       {{"theta1", 0.0}, {"theta2", 1.2}, {"lambda", 0.3}, {"phi1", 0.0}, {"phi2", 0.0}, {"b1", 1.0}, {"b2", -1.0},
        {"half_width", 2.5}, {"samples", 41}}},
      {"parallel-pair", "a plane and its translate: disjoint parallel pair",
       {{"theta1", 0.0}, {"theta2", pi}, {"offset", 0.6}, {"half_width", 2.0}, {"samples", 21}}},
      {"lawlor-neck", "connected neck {gamma u} asymptotic to R^2 and i R^2",
       {{"sigma", 0.05}, {"r_max", 5.0}, {"nr", 81}, {"nphi", 33}}},
      {"hopf-fibers", "two Hopf fibers e^{it} p of S^3", {{"p", {1.0, 0.0, 0.0, 0.0}}, {"q", {0.0, 0.0, 1.0, 0.0}}, {"samples", 120}}},
      {"tiny-sphere", "m = 1 plane pair plus a small round sphere inside B_2",
       {{"theta1", 0.0}, {"theta2", 1.2}, {"half_width", 3.5}, {"samples", 29}, {"radius", 0.01},
        {"center", {0.5, 0.5, -0.5, 0.5}}}},
  };
  return catalog;
}

Vec2 grim_reaper_point(double s) {
  const double a = std::abs(s);
  return {std::atan(std::sinh(s)), a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0)};
}

DiscreteCurve grim_reaper_curve(double s_max, int n, double t, double scale) {
  if (n < 2 || !(s_max > 0.0) || !(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad Grim Reaper sampling");
  Polyline p;
  for (int i = 0; i < n; ++i) {
    const double s = -s_max + 2.0 * s_max * i / (n - 1);
    p.vertices.push_back(scale * grim_reaper_point(s) + Vec2(0.0, t / scale));
  }
  return {{p}};
}

namespace {

json merged(const FixtureInfo& info, const json& params) {
  json p = info.defaults;
  if (!params.is_null()) {
    if (!params.is_object()) throw Error(ErrorCode::InvalidArgument, "fixture parameters must be an object");
    for (const auto& [k, v] : params.items()) {
      if (!p.contains(k)) throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + k + "' for fixture " + info.name);
      p[k] = v;
    }
  }
  return p;
}

double num(const json& p, const char* k) { return p.at(k).get<double>(); }
int count(const json& p, const char* k, int min) {
  const int v = p.at(k).get<int>();
  if (v < min) throw Error(ErrorCode::InvalidArgument, std::string(k) + " must be at least " + std::to_string(min));
  return v;
}
Vec4 vec4(const json& p, const char* k) {
  const auto v = p.at(k).get<std::vector<double>>();
  if (v.size() != 4) throw Error(ErrorCode::InvalidArgument, std::string(k) + " needs four entries");
  return Vec4(v[0], v[1], v[2], v[3]);
}

Polyline segment(double angle, double half_length, int n, const Vec2& offset, double sigma) {
  Polyline p;
  const Vec2 d(std::cos(angle), std::sin(angle)), nrm = rotate_j(d);
  for (int i = 0; i < n; ++i) {
    const double s = -half_length + 2.0 * half_length * i / (n - 1);
    p.vertices.push_back(offset + s * d + sigma * std::exp(-s * s) * nrm);
  }
  return p;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.values.size(); ++c)
    for (std::size_t i = 0; i < a.values[c].size(); ++i) m = std::max(m, std::abs(a.values[c][i] - b.values[c][i]));
  return m;
}

// Two curve components labeled by their lines.
void line_pair(Fixture& f, double sigma) {
  const json& p = f.params;
  const double a1 = num(p, "angle1"), a2 = num(p, "angle2"), hl = num(p, "half_length");
  const int n = count(p, "N", 3);
  DiscreteCurve c;
  c.components.push_back(segment(a1, hl, n, Vec2::Zero(), sigma));
  c.components.push_back(segment(a2, hl, n, Vec2::Zero(), sigma));
  c.components[1].component_id = 1;
  f.curve = c;
  f.limit_lines = {line_through_origin(a1), line_through_origin(a2)};
  ScalarField theta = make_field(c, "theta");
  for (std::size_t k = 0; k < 2; ++k)
    for (double& v : theta.values[k]) v = f.limit_lines[k].angle();
  f.reference["theta_limit"] = theta;
  if (sigma == 0.0) f.audit["theta"] = {max_diff(theta, lagrangian_angle(c)), 1e-10};
  double dev = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const Vec2 d = f.limit_lines[k].direction;
    for (const Vec2& v : c.components[k].vertices) {
      const double s = v.dot(d);
      dev = std::max(dev, std::abs(cross(d, v) - sigma * std::exp(-s * s)));
    }
  }
  f.audit["normal_offset"] = {dev, 1e-12};
}

void plane_surfaces(Fixture& f, const PlanePairConfig& cfg) {
  const double hw = num(f.params, "half_width");
  const int s = count(f.params, "samples", 2);
  f.pair = cfg;
  f.surfaces = {plane_patch(cfg, 0, hw, s), plane_patch(cfg, 1, hw, s)};
  double dev = 0.0;
  for (int j = 0; j < 2; ++j) {
    const MatX& B = cfg.planes[j].basis;
    for (const Vec4& v : f.surfaces[j].vertices) dev = std::max(dev, (VecX(v) - B * (B.transpose() * VecX(v))).norm());
    dev = std::max(dev, std::abs(plane_angle(B) - cfg.planes[j].angle));
  }
  f.audit["plane_membership_and_angle"] = {dev, 1e-10};
}

}  // namespace

Fixture generate_fixture(const std::string& name, const json& params) {
  const auto& cat = fixture_catalog();
  const auto it = std::find_if(cat.begin(), cat.end(), [&](const FixtureInfo& i) { return i.name == name; });
  if (it == cat.end()) throw Error(ErrorCode::UnknownFixture, "unknown fixture '" + name + "'");
  Fixture f;
  f.name = name;
  f.object = it->object;
  f.params = merged(*it, params);
  const json& p = f.params;

  if (name == "line") {
    const auto off = p.at("offset").get<std::vector<double>>();
    if (off.size() != 2) throw Error(ErrorCode::InvalidArgument, "offset needs two entries");
    const double a = num(p, "angle");
    const DiscreteCurve c{{segment(a, num(p, "half_length"), count(p, "N", 3), Vec2(off[0], off[1]), 0.0)}};
    f.curve = c;
    const AffineLine l{Vec2(off[0], off[1]), Vec2(std::cos(a), std::sin(a))};
    f.limit_lines = {l};
    ScalarField theta = make_field(c, "theta", a), beta = make_field(c, "beta");
    const Vec2 p0 = c.components[0].vertices[0];
    for (std::size_t i = 0; i < c.components[0].size(); ++i)
      beta.values[0][i] = cross(p0, l.direction) * (c.components[0].vertices[i] - p0).dot(l.direction);
    f.reference["theta"] = theta;
    f.reference["beta"] = beta;
    f.audit["theta"] = {max_diff(theta, lagrangian_angle(c)), 1e-10};
    f.audit["beta"] = {max_diff(beta, exactness_primitive(c)), 1e-10};
  } else if (name == "circle") {
    const double r = num(p, "r");
    const int n = count(p, "N", 8);
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "r must be positive");
    Polyline poly;
    poly.closed = true;
    ScalarField theta;
    theta.name = "theta";
    theta.values.resize(1);
    theta.seam_jump = {2.0 * pi};
    for (int i = 0; i < n; ++i) {
      const double phi = 2.0 * pi * i / n;
      poly.vertices.push_back(r * Vec2(std::cos(phi), std::sin(phi)));
      theta.values[0].push_back(phi + pi / 2);
    }
    f.curve = DiscreteCurve{{poly}};
    f.reference["theta"] = theta;
    f.audit["theta"] = {max_diff(theta, lagrangian_angle(*f.curve)), 1e-10};
  } else if (name == "grim-reaper") {
    const double delta = num(p, "delta"), t = num(p, "t");
    const int n = count(p, "N", 8);
    if (!(delta > 0.0 && delta < pi / 2)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, pi/2)");
    // arclength s with x = atan(sinh s), y = log cosh s; the ends sit at |x| = pi/2 - delta
    const double s_max = std::asinh(std::tan(pi / 2 - delta));
    Polyline poly;
    ScalarField theta, w;
    theta.name = "theta";
    w.name = "w";
    theta.values.resize(1);
    w.values.resize(1);
    // frame: e_z = -e_y (against the motion), e_w = J e_z = e_x, so w = x
    CoordinateFrame frame;
    frame.e_z = Vec2(0.0, -1.0);
    frame.e_w = rotate_j(Vec2(0.0, -1.0));
    for (int i = 0; i < n; ++i) {
      const double s = -s_max + 2.0 * s_max * i / (n - 1);
      const Vec2 x = grim_reaper_point(s) + Vec2(0.0, t);
      poly.vertices.push_back(x);
      theta.values[0].push_back(std::atan(std::sinh(s)));
      w.values[0].push_back(frame.e_w.dot(VecX(x)));
    }
    f.curve = DiscreteCurve{{poly}};
    f.frame = frame;
    f.reference["theta"] = theta;
    f.reference["w"] = w;
    f.audit["w_minus_theta"] = {max_diff(w, theta), 1e-10};
    // the discrete angle converges at second order away from the one-sided endpoints
    const double h = 2.0 * s_max / (n - 1);
    const ScalarField discrete = lagrangian_angle(*f.curve);
    double dev = 0.0;
    for (int i = 1; i + 1 < n; ++i) dev = std::max(dev, std::abs(discrete.values[0][i] - theta.values[0][i]));
    f.audit["theta_discrete_interior"] = {dev, h * h};
  } else if (name == "line-pair") {
    line_pair(f, 0.0);
  } else if (name == "smoothed-pair") {
    const double sigma = num(p, "sigma");
    if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be non-negative");
    line_pair(f, sigma);
  } else if (name == "plane-pair-m1") {
    plane_surfaces(f, make_plane_pair(2, num(p, "theta1"), num(p, "theta2"), 1));
  } else if (name == "plane-pair-m0") {
    plane_surfaces(f, make_plane_pair(2, num(p, "theta1"), num(p, "theta2"), 0));
  } else if (name == "tilted-pair") {
    const PlanePairConfig cfg = make_plane_pair(2, num(p, "theta1"), num(p, "theta2"), 1);
    const double hw = num(p, "half_width"), lambda = num(p, "lambda");
    const int s = count(p, "samples", 2);
    f.pair = cfg;
    f.surfaces = {tilted_plane(cfg, 0, num(p, "phi1"), lambda, num(p, "b1"), hw, s),
                  tilted_plane(cfg, 1, num(p, "phi2"), lambda, num(p, "b2"), hw, s)};
    double dev = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double phi = num(p, j == 0 ? "phi1" : "phi2"), b = num(p, j == 0 ? "b1" : "b2");
      for (const Vec4& v : f.surfaces[j].vertices)
        dev = std::max(dev, std::abs(cfg.w(VecX(v)) - phi - lambda * b * cfg.z(VecX(v))));
    }
    f.audit["graph_identity"] = {dev, 1e-10};
  } else if (name == "parallel-pair") {
    const PlanePairConfig cfg = make_plane_pair(2, num(p, "theta1"), num(p, "theta2"), 0);
    const double hw = num(p, "half_width");
    const int s = count(p, "samples", 2);
    f.pair = cfg;
    const Vec4 offset = num(p, "offset") * Vec4(VecX(cfg.planes[1].basis.col(0)));
    f.surfaces = {plane_patch(cfg, 0, hw, s), plane_patch(cfg, 0, hw, s, offset)};
    f.audit["offset_normal_to_plane"] = {(cfg.planes[0].basis.transpose() * VecX(offset)).norm(), 1e-10};
  } else if (name == "lawlor-neck") {
    const double sigma = num(p, "sigma"), r_max = num(p, "r_max");
    const int nr = count(p, "nr", 2), nphi = count(p, "nphi", 3);
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    f.pair = make_plane_pair(2, 0.0, pi, 0);
    const double a = sigma / std::sqrt(2.0);
    f.surfaces = {parametric_surface(
        [a](double r, double phi) {
          const double gx = a * std::exp(r), gy = a * std::exp(-r);
          return Vec4(gx * std::cos(phi), gy * std::cos(phi), gx * std::sin(phi), gy * std::sin(phi));
        },
        -r_max, r_max, 0.0, 2.0 * pi, nr, nphi)};
    double dev = 0.0;
    for (const Vec4& v : f.surfaces[0].vertices) {
      // gamma lies on x y = sigma^2 / 2 in each C factor after removing u
      const double gx = std::hypot(v[0], v[2]), gy = std::hypot(v[1], v[3]);
      dev = std::max(dev, std::abs(gx * gy - sigma * sigma / 2));
    }
    f.audit["hyperbola"] = {dev, 1e-12};
  } else if (name == "hopf-fibers") {
    const int s = count(p, "samples", 3);
    const Vec4 a = vec4(p, "p"), b = vec4(p, "q");
    if (!(a.norm() > 0.0 && b.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "fiber points must be nonzero");
    f.loops = {hopf_fiber(a, s), hopf_fiber(b, s)};
    double dev = 0.0;
    for (const auto& l : f.loops)
      for (const Vec4& v : l) dev = std::max(dev, std::abs(v.norm() - 1.0));
    f.audit["unit_sphere"] = {dev, 1e-12};
  } else if (name == "tiny-sphere") {
    plane_surfaces(f, make_plane_pair(2, num(p, "theta1"), num(p, "theta2"), 1));
    const Vec4 c = vec4(p, "center");
    const double r = num(p, "radius");
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
    f.surfaces.push_back(parametric_surface(
        [&](double u, double v) {
          return Vec4(c + r * Vec4(std::cos(u) * std::cos(v), std::cos(u) * std::sin(v), std::sin(u), 0.0));
        },
        -pi / 2, pi / 2, 0.0, 2.0 * pi, 9, 17));
    double dev = 0.0;
    for (const Vec4& v : f.surfaces[2].vertices) dev = std::max(dev, std::abs((v - c).norm() - r));
    f.audit["sphere_radius"] = {dev, 1e-12};
  }
  if (f.curve) validate(*f.curve);
  if (!f.audit_ok()) throw Error(ErrorCode::InvalidArgument, "fixture " + name + " fails its identity audit");
  return f;
}

void write_surface(std::ostream& out, const SurfaceMesh& mesh) {
  out << "# lmcf-surface v1\n";
  for (const Vec4& v : mesh.vertices)
    out << "v," << format_double(v[0]) << ',' << format_double(v[1]) << ',' << format_double(v[2]) << ','
        << format_double(v[3]) << '\n';
  for (const auto& t : mesh.triangles) out << "t," << t[0] << ',' << t[1] << ',' << t[2] << '\n';
}

SurfaceMesh read_surface(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# lmcf-surface v1", 0) != 0)
    throw Error(ErrorCode::IoError, "missing lmcf-surface header");
  SurfaceMesh m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line.substr(2));
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line[0] == 'v' && cells.size() == 4) {
      m.vertices.emplace_back(std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]));
    } else if (line[0] == 't' && cells.size() == 3) {
      m.triangles.push_back({std::stoi(cells[0]), std::stoi(cells[1]), std::stoi(cells[2])});
    } else {
      throw Error(ErrorCode::IoError, "bad surface line: " + line);
    }
  }
  for (const auto& t : m.triangles)
    for (int v : t)
      if (v < 0 || v >= static_cast<int>(m.vertices.size())) throw Error(ErrorCode::IoError, "triangle index out of range");
  return m;
}

std::vector<std::string> save_fixture(const Fixture& f, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto open = [&](const std::string& file) {
    const std::string path = (fs::path(dir) / file).string();
    written.push_back(path);
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    return out;
  };
  json summary;
  summary["fixture"] = f.name;
  summary["object"] = f.object;
  summary["params"] = f.params;
  for (const auto& [k, v] : f.audit) summary["audit"][k] = {{"deviation", v.first}, {"tolerance", v.second}};
  for (const auto& l : f.limit_lines)
    summary["limit_lines"].push_back({{"point", {l.point.x(), l.point.y()}}, {"direction", {l.direction.x(), l.direction.y()}}});
  if (f.frame) summary["frame"] = {{"e_z", {f.frame->e_z[0], f.frame->e_z[1]}}, {"e_w", {f.frame->e_w[0], f.frame->e_w[1]}}};
  if (f.pair) summary["plane_pair"] = json::parse(plane_pair_to_json(*f.pair));
  if (f.curve) {
    auto out = open(f.name + ".curve.csv");
    write_curve(out, *f.curve);
  }
  for (std::size_t k = 0; k < f.surfaces.size(); ++k) {
    auto out = open(f.name + ".surface" + std::to_string(k) + ".csv");
    write_surface(out, f.surfaces[k]);
  }
  for (std::size_t k = 0; k < f.loops.size(); ++k) {
    auto out = open(f.name + ".loop" + std::to_string(k) + ".csv");
    out << "x1,y1,x2,y2\n";
    for (const Vec4& v : f.loops[k])
      out << format_double(v[0]) << ',' << format_double(v[1]) << ',' << format_double(v[2]) << ','
          << format_double(v[3]) << '\n';
  }
  auto out = open(f.name + ".json");
  out << summary.dump(2) << '\n';
  return written;
}

}  // namespace lmcf
