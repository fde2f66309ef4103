#include "lmcf/linking.hpp"

#include "lmcf/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace lmcf {

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double l2 = d.squaredNorm();
  const double t = l2 > 0.0 ? std::clamp((p - a).dot(d) / l2, 0.0, 1.0) : 0.0;
  return (p - (a + t * d)).norm();
}

double line_distance(const Vec2& p, const AffineLine& l) { return std::abs(cross(p - l.point, l.direction)); }

}  // namespace

std::vector<std::size_t> CurveComponent::vertices() const {
  std::vector<std::size_t> out;
  if (first <= last) {
    for (std::size_t i = first; i <= last; ++i) out.push_back(i);
  } else {
    for (std::size_t i = first; i < polyline_size; ++i) out.push_back(i);
    for (std::size_t i = 0; i <= last; ++i) out.push_back(i);
  }
  return out;
}

namespace {

struct Run {
  std::size_t component;
  std::vector<std::size_t> idx;
  double mass = 0.0;
};

std::vector<Run> curve_runs(const DiscreteCurve& c, double inner, double outer) {
  std::vector<Run> runs;
  for (std::size_t k = 0; k < c.components.size(); ++k) {
    const Polyline& p = c.components[k];
    const std::size_t n = p.size();
    std::vector<char> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = p.vertices[i].norm() < outer;
    std::size_t start = 0;
    if (p.closed) {
      const auto it = std::find(in.begin(), in.end(), 0);
      if (it == in.end()) {
        Run r{k, {}, 0.0};
        for (std::size_t i = 0; i < n; ++i) r.idx.push_back(i);
        runs.push_back(r);
        continue;
      }
      start = static_cast<std::size_t>(it - in.begin());
    }
    Run cur{k, {}, 0.0};
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t i = (start + s) % n;
      if (in[i]) {
        cur.idx.push_back(i);
      } else if (!cur.idx.empty()) {
        runs.push_back(cur);
        cur.idx.clear();
      }
    }
    if (!cur.idx.empty()) runs.push_back(cur);
  }
  for (Run& r : runs) {
    const Polyline& p = c.components[r.component];
    for (std::size_t a = 0; a + 1 < r.idx.size(); ++a) {
      const Vec2& x = p.vertices[r.idx[a]];
      const Vec2& y = p.vertices[r.idx[a + 1]];
      const double frac = 0.5 * ((x.norm() < inner) + (y.norm() < inner));
      r.mass += frac * (y - x).norm();
    }
  }
  return runs;
}

double run_distance(const DiscreteCurve& c, const Run& a, const Run& b) {
  const Polyline& pa = c.components[a.component];
  const Polyline& pb = c.components[b.component];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : a.idx)
    for (std::size_t j = 0; j + 1 < b.idx.size(); ++j)
      best = std::min(best, point_segment_distance(pa.vertices[i], pb.vertices[b.idx[j]], pb.vertices[b.idx[j + 1]]));
  for (std::size_t i : b.idx)
    for (std::size_t j = 0; j + 1 < a.idx.size(); ++j)
      best = std::min(best, point_segment_distance(pb.vertices[i], pa.vertices[a.idx[j]], pa.vertices[a.idx[j + 1]]));
  return best;
}

CurveComponent to_component(const DiscreteCurve& curve, const Run& r, int label) {
  CurveComponent c;
  c.polyline_size = curve.components[r.component].size();
  c.label = label;
  c.component = r.component;
  c.first = r.idx.front();
  c.last = r.idx.back();
  c.inner_mass = r.mass;
  return c;
}

}  // namespace

CurveExtraction extract_curve_components(const DiscreteCurve& c, const std::vector<AffineLine>& limit, double inner,
                                         double outer, double delta) {
  if (limit.size() != 2) throw Error(ErrorCode::InvalidArgument, "two limit lines required");
  if (!(inner > 0.0 && outer > inner)) throw Error(ErrorCode::InvalidArgument, "need 0 < inner < outer");
  std::vector<Run> runs = curve_runs(c, inner, outer);
  runs.erase(std::remove_if(runs.begin(), runs.end(), [](const Run& r) { return !(r.mass > 0.0); }), runs.end());
  CurveExtraction ex;
  const double total = std::accumulate(runs.begin(), runs.end(), 0.0, [](double s, const Run& r) { return s + r.mass; });
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.mass > b.mass; });
  std::vector<Run> kept;
  for (const Run& r : runs) {
    if (kept.size() < 2 && r.mass >= ex.discard_fraction * total) kept.push_back(r);
    else ex.leftovers.push_back(to_component(c, r, -1));
  }
  if (kept.size() < 2)
    throw Error(ErrorCode::ComponentAmbiguity, "fewer than two components meet B_" + std::to_string(inner));

  double score[2][2];
  for (int a = 0; a < 2; ++a) {
    const Polyline& p = c.components[kept[a].component];
    int count = 0;
    Vec2 dir = Vec2::Zero();
    const auto& idx = kept[a].idx;
    for (std::size_t m = 0; m < idx.size(); ++m) {
      const Vec2& x = p.vertices[idx[m]];
      if (x.norm() >= inner) continue;
      ++count;
      if (m + 1 < idx.size()) {
        const Vec2 e = p.vertices[idx[m + 1]] - x;
        if (e.norm() > 0.0) dir += e.normalized();
      }
    }
    if (dir.norm() > 0.0) dir.normalize();
    for (int j = 0; j < 2; ++j) {
      double dj = 0.0;
      for (std::size_t i : idx)
        if (p.vertices[i].norm() < inner) dj += line_distance(p.vertices[i], limit[j]);
      score[a][j] = (count > 0 ? dj / count : 0.0) + (dir - limit[j].direction).norm();
    }
  }
  const double straight = score[0][0] + score[1][1];
  const double swapped = score[0][1] + score[1][0];
  ex.label_margin = std::abs(straight - swapped);
  if (ex.label_margin < 2.0 * delta)
    throw Error(ErrorCode::ComponentAmbiguity, "labeling by nearest limit line is not unique within 2 delta");
  const bool swap = swapped < straight;
  ex.labeled.resize(2);
  ex.labeled[swap ? 1 : 0] = to_component(c, kept[0], swap ? 1 : 0);
  ex.labeled[swap ? 0 : 1] = to_component(c, kept[1], swap ? 0 : 1);
  ex.separation = run_distance(c, kept[0], kept[1]);
  return ex;
}

// ---------------------------------------------------------------------------------------------

SurfaceMesh parametric_surface(const std::function<Vec4(double, double)>& f, double u0, double u1, double v0,
                               double v1, int nu, int nv) {
  if (nu < 2 || nv < 2) throw Error(ErrorCode::InvalidArgument, "surface grid needs at least 2 x 2 samples");
  SurfaceMesh m;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      m.vertices.push_back(f(u0 + (u1 - u0) * i / (nu - 1), v0 + (v1 - v0) * j / (nv - 1)));
  auto id = [nv](int i, int j) { return i * nv + j; };
  for (int i = 0; i + 1 < nu; ++i)
    for (int j = 0; j + 1 < nv; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

SurfaceMesh plane_patch(const PlanePairConfig& cfg, int j, double half_width, int samples, const Vec4& offset) {
  if (cfg.n != 2) throw Error(ErrorCode::InvalidArgument, "surfaces are supported in C^2 only");
  return parametric_surface(
      [&](double u, double v) {
        VecX y(2);
        y << u, v;
        return Vec4(cfg.point(j, y) + offset);
      },
      -half_width, half_width, -half_width, half_width, samples, samples);
}

SurfaceMesh merge(const SurfaceMesh& a, const SurfaceMesh& b) {
  SurfaceMesh m = a;
  const int off = static_cast<int>(a.vertices.size());
  m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (auto t : b.triangles) m.triangles.push_back({t[0] + off, t[1] + off, t[2] + off});
  return m;
}

namespace {

double triangle_area(const SurfaceMesh& m, const std::array<int, 3>& t) {
  const Vec4 e1 = m.vertices[t[1]] - m.vertices[t[0]];
  const Vec4 e2 = m.vertices[t[2]] - m.vertices[t[0]];
  const double g = e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2);
  return 0.5 * std::sqrt(std::max(0.0, g));
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

SurfaceExtraction extract_components(const SurfaceMesh& mesh, const PlanePairConfig& cfg, double inner, double outer,
                                     double delta) {
  if (!(inner > 0.0 && outer > inner)) throw Error(ErrorCode::InvalidArgument, "need 0 < inner < outer");
  std::vector<int> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> kept;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    bool meets = false;
    for (int v : tri) meets = meets || mesh.vertices[v].norm() < outer;
    if (!meets) continue;
    kept.push_back(static_cast<int>(t));
    parent[find_root(parent, tri[1])] = find_root(parent, tri[0]);
    parent[find_root(parent, tri[2])] = find_root(parent, tri[0]);
  }
  std::map<int, SurfaceComponent> groups;
  for (int t : kept) {
    const auto& tri = mesh.triangles[t];
    SurfaceComponent& g = groups[find_root(parent, tri[0])];
    g.triangles.push_back(t);
    int inside = 0;
    for (int v : tri) inside += mesh.vertices[v].norm() < inner;
    g.inner_mass += triangle_area(mesh, tri) * inside / 3.0;
  }
  std::vector<SurfaceComponent> comps;
  double total = 0.0;
  for (auto& [root, g] : groups)
    if (g.inner_mass > 0.0) {
      total += g.inner_mass;
      comps.push_back(std::move(g));
    }
  std::sort(comps.begin(), comps.end(),
            [](const SurfaceComponent& a, const SurfaceComponent& b) { return a.inner_mass > b.inner_mass; });
  SurfaceExtraction ex;
  std::vector<SurfaceComponent> top;
  for (auto& c : comps) {
    if (top.size() < 2 && c.inner_mass >= ex.discard_fraction * total) top.push_back(c);
    else ex.leftovers.push_back(c);
  }
  if (top.size() < 2) throw Error(ErrorCode::ComponentAmbiguity, "fewer than two components meet B_inner");
  double score[2][2];
  for (int a = 0; a < 2; ++a)
    for (int j = 0; j < 2; ++j) {
      const MatX& B = cfg.planes[j].basis;
      double s = 0.0;
      int count = 0;
      for (int t : top[a].triangles)
        for (int v : mesh.triangles[t]) {
          const VecX x = mesh.vertices[v];
          if (x.norm() >= inner) continue;
          s += (x - B * (B.transpose() * x)).norm();
          ++count;
        }
      score[a][j] = count > 0 ? s / count : 0.0;
    }
  const double straight = score[0][0] + score[1][1], swapped = score[0][1] + score[1][0];
  ex.label_margin = std::abs(straight - swapped);
  if (ex.label_margin < 2.0 * delta)
    throw Error(ErrorCode::ComponentAmbiguity, "labeling by nearest plane is not unique within 2 delta");
  const bool swap = swapped < straight;
  top[0].label = swap ? 1 : 0;
  top[1].label = swap ? 0 : 1;
  ex.labeled = {top[0].label == 0 ? top[0] : top[1], top[0].label == 0 ? top[1] : top[0]};
  return ex;
}

SurfaceMesh component_mesh(const SurfaceMesh& mesh, const SurfaceComponent& c) {
  SurfaceMesh m;
  std::map<int, int> remap;
  for (int t : c.triangles) {
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.triangles[t][k];
      auto it = remap.find(v);
      if (it == remap.end()) {
        it = remap.emplace(v, static_cast<int>(m.vertices.size())).first;
        m.vertices.push_back(mesh.vertices[v]);
      }
      tri[k] = it->second;
    }
    m.triangles.push_back(tri);
  }
  return m;
}

// ---------------------------------------------------------------------------------------------

namespace {

struct Segment {
  int from;  // crossing point ids
  int to;
  int tri;
};

bool try_slice(const SurfaceMesh& mesh, double R, int arc_points, SphereSlice& out) {
  const double tol = 1e-9 * R;
  for (const Vec4& v : mesh.vertices)
    if (std::abs(v.norm() - R) < tol) return false;
  std::map<std::pair<int, int>, int> crossing;
  std::vector<Vec4> points;
  auto edge_point = [&](int a, int b) -> int {
    const auto key = std::minmax(a, b);
    auto it = crossing.find(key);
    if (it != crossing.end()) return it->second;
    const Vec4 p = mesh.vertices[key.first], d = mesh.vertices[key.second] - p;
    // |p + s d|^2 = R^2 with exactly one root in (0, 1)
    const double qa = d.squaredNorm(), qb = 2.0 * p.dot(d), qc = p.squaredNorm() - R * R;
    const double disc = std::sqrt(std::max(0.0, qb * qb - 4.0 * qa * qc));
    double s = (-qb + disc) / (2.0 * qa);
    if (s < 0.0 || s > 1.0) s = (-qb - disc) / (2.0 * qa);
    const int id = static_cast<int>(points.size());
    points.push_back(p + s * d);
    crossing.emplace(key, id);
    return id;
  };
  std::vector<Segment> segs;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    std::array<bool, 3> outside{};
    for (int k = 0; k < 3; ++k) outside[k] = mesh.vertices[tri[k]].norm() > R;
    std::vector<int> ids;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (outside[k] != outside[(k + 1) % 3]) ids.push_back(edge_point(a, b));
    }
    const Vec4 v0 = mesh.vertices[tri[0]];
    const Vec4 e1 = mesh.vertices[tri[1]] - v0, e2 = mesh.vertices[tri[2]] - v0;
    Eigen::Matrix2d G;
    G << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
    if (std::abs(G.determinant()) < 1e-300) continue;
    // closest point of the triangle's plane to the origin
    const Eigen::Vector2d ab = G.ldlt().solve(Eigen::Vector2d(-e1.dot(v0), -e2.dot(v0)));
    const Vec4 c = v0 + ab[0] * e1 + ab[1] * e2;
    const bool c_inside = ab[0] >= 0.0 && ab[1] >= 0.0 && ab[0] + ab[1] <= 1.0;
    if (ids.empty()) {
      // a circle entirely inside one triangle, or tangency
      if (c_inside && c.norm() <= R + tol && outside[0] && outside[1] && outside[2]) return false;
      continue;
    }
    if (ids.size() != 2) return false;
    if (c_inside && std::abs(c.norm() - R) < 1e-6 * R) return false;
    // orient as the boundary of the part inside the ball: (outward, tangent) positive in the triangle
    const Vec4 mid = 0.5 * (points[ids[0]] + points[ids[1]]);
    const Vec4 d = points[ids[1]] - points[ids[0]];
    const Eigen::Vector2d oc = G.ldlt().solve(Eigen::Vector2d(e1.dot(mid - c), e2.dot(mid - c)));
    const Eigen::Vector2d dc = G.ldlt().solve(Eigen::Vector2d(e1.dot(d), e2.dot(d)));
    const double orient = (oc[0] * dc[1] - oc[1] * dc[0]);
    if (orient > 0.0) segs.push_back({ids[0], ids[1], static_cast<int>(t)});
    else segs.push_back({ids[1], ids[0], static_cast<int>(t)});
  }
  std::vector<int> next(points.size(), -1);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (next[segs[s].from] != -1) return false;
    next[segs[s].from] = static_cast<int>(s);
  }
  std::vector<char> used(segs.size(), 0);
  out.curves.clear();
  for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (used[s0]) continue;
    SliceCurve curve;
    std::size_t s = s0;
    while (!used[s]) {
      used[s] = 1;
      const Segment& sg = segs[s];
      const auto& tri = mesh.triangles[sg.tri];
      const Vec4 v0 = mesh.vertices[tri[0]];
      const Vec4 e1 = mesh.vertices[tri[1]] - v0, e2 = mesh.vertices[tri[2]] - v0;
      Eigen::Matrix2d G;
      G << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
      const Eigen::Vector2d ab = G.ldlt().solve(Eigen::Vector2d(-e1.dot(v0), -e2.dot(v0)));
      const Vec4 c = v0 + ab[0] * e1 + ab[1] * e2;
      const Vec4 p = points[sg.from] - c, q = points[sg.to] - c;
      const double rho = std::sqrt(std::max(0.0, R * R - c.squaredNorm()));
      const double cosang = std::clamp(p.dot(q) / (p.norm() * q.norm()), -1.0, 1.0);
      const double ang = std::acos(cosang);
      curve.exact_length += rho * ang;
      // slerp within the circle
      const Vec4 u = p.normalized();
      Vec4 w = q - q.dot(u) * u;
      w = w.norm() > 0.0 ? w.normalized() : Vec4::Zero();
      for (int k = 0; k < arc_points; ++k) {
        const double a = ang * k / arc_points;
        curve.vertices.push_back(c + rho * (std::cos(a) * u + std::sin(a) * w));
      }
      const int nx = next[sg.to];
      if (nx < 0) return false;  // open chain: slice reaches the mesh boundary
      s = static_cast<std::size_t>(nx);
    }
    if (s != s0) return false;
    out.curves.push_back(std::move(curve));
  }
  return true;
}

}  // namespace

SphereSlice sphere_slice(const SurfaceMesh& mesh, double R, int arc_points) {
  if (!(R > 0.0) || arc_points < 1) throw Error(ErrorCode::InvalidArgument, "need R > 0 and arc_points >= 1");
  SphereSlice s;
  for (int attempt = 0; attempt <= 10; ++attempt) {
    s.radius = R + 0.003 * attempt;
    s.retries = attempt;
    if (try_slice(mesh, s.radius, arc_points, s)) return s;
  }
  throw Error(ErrorCode::NoTransverseRadius, "no transverse slice radius within 10 retries");
}

// ---------------------------------------------------------------------------------------------

double gauss_linking_r3(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b) {
  using V3 = Eigen::Vector3d;
  double total = 0.0;
  const std::size_t na = a.size(), nb = b.size();
  for (std::size_t i = 0; i < na; ++i) {
    const V3& p1 = a[i];
    const V3& p2 = a[(i + 1) % na];
    for (std::size_t j = 0; j < nb; ++j) {
      const V3& q1 = b[j];
      const V3& q2 = b[(j + 1) % nb];
      const V3 r13 = q1 - p1, r14 = q2 - p1, r23 = q1 - p2, r24 = q2 - p2;
      V3 n[4] = {r13.cross(r14), r14.cross(r24), r24.cross(r23), r23.cross(r13)};
      bool degenerate = false;
      for (auto& v : n) {
        const double l = v.norm();
        if (l < 1e-300) degenerate = true;
        else v /= l;
      }
      if (degenerate) continue;
      double omega = 0.0;
      for (int k = 0; k < 4; ++k) omega += std::asin(std::clamp(n[k].dot(n[(k + 1) % 4]), -1.0, 1.0));
      const double sign = (q2 - q1).cross(p2 - p1).dot(r13);
      total += (sign > 0 ? 1.0 : (sign < 0 ? -1.0 : 0.0)) * omega;
    }
  }
  return total / (4.0 * pi);
}

namespace {

double min_distance(const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec4& p : a)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Vec4& q1 = b[j];
      const Vec4 d = b[(j + 1) % b.size()] - q1;
      const double l2 = d.squaredNorm();
      const double t = l2 > 0.0 ? std::clamp((p - q1).dot(d) / l2, 0.0, 1.0) : 0.0;
      best = std::min(best, (p - q1 - t * d).norm());
    }
  return best;
}

double longest_edge(const std::vector<Vec4>& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[(i + 1) % a.size()] - a[i]).norm());
  return m;
}

Eigen::Matrix<double, 4, 3> complement_basis(const Vec4& pole) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.col(0) = pole;
  Eigen::HouseholderQR<Eigen::Matrix4d> qr(m);
  Eigen::Matrix4d q = qr.householderQ();
  if (q.col(0).dot(pole) < 0.0) q.col(0) *= -1.0;
  if (q.determinant() < 0.0) q.col(3) *= -1.0;
  return q.rightCols<3>();
}

std::vector<Eigen::Vector3d> stereographic(const std::vector<Vec4>& c, const Vec4& pole,
                                           const Eigen::Matrix<double, 4, 3>& basis) {
  std::vector<Eigen::Vector3d> out;
  for (const Vec4& x : c) {
    const Vec4 y = x.normalized();
    out.push_back(basis.transpose() * y / (1.0 - y.dot(pole)));
  }
  return out;
}

double distance_to_curves(const Vec4& pole, const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto* c : {&a, &b})
    for (const Vec4& x : *c) d = std::min(d, (x.normalized() - pole).norm());
  return d;
}

}  // namespace

std::vector<Vec4> admissible_poles(const std::vector<Vec4>& a, const std::vector<Vec4>& b, int count,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<std::pair<double, Vec4>> cand;
  for (int i = 0; i < std::max(200, 50 * count); ++i) {
    Vec4 p(g(rng), g(rng), g(rng), g(rng));
    p.normalize();
    cand.emplace_back(distance_to_curves(p, a, b), p);
  }
  std::stable_sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<Vec4> out;
  for (int i = 0; i < count; ++i) out.push_back(cand[i].second);
  return out;
}

LinkingResult linking_number_with_pole(const std::vector<Vec4>& a, const std::vector<Vec4>& b, const Vec4& pole) {
  if (a.size() < 3 || b.size() < 3) throw Error(ErrorCode::InvalidArgument, "curves need at least three vertices");
  LinkingResult r;
  r.min_distance = min_distance(a, b);
  const double edge = std::max(longest_edge(a), longest_edge(b));
  if (!(r.min_distance > 10.0 * edge))
    throw Error(ErrorCode::CurvesTooClose, "curve distance " + std::to_string(r.min_distance) +
                                               " is not above 10 x edge length " + std::to_string(edge));
  r.pole = pole.normalized();
  const auto basis = complement_basis(r.pole);
  r.raw = gauss_linking_r3(stereographic(a, r.pole, basis), stereographic(b, r.pole, basis));
  r.value = static_cast<int>(std::lround(r.raw));
  r.margin = std::abs(r.raw - r.value);
  if (!(r.margin < 0.1))
    throw Error(ErrorCode::RoundingAmbiguity, "raw linking integral " + std::to_string(r.raw) + " is not near an integer");
  return r;
}

LinkingResult linking_number(const std::vector<Vec4>& a, const std::vector<Vec4>& b, std::uint64_t seed) {
  return linking_number_with_pole(a, b, admissible_poles(a, b, 1, seed).front());
}

std::vector<Vec4> hopf_fiber(const Vec4& p, int samples) {
  std::vector<Vec4> out;
  const Vec4 u = p.normalized();
  for (int k = 0; k < samples; ++k) {
    const double t = 2.0 * pi * k / samples;
    const double c = std::cos(t), s = std::sin(t);
    out.emplace_back(c * u[0] - s * u[1], s * u[0] + c * u[1], c * u[2] - s * u[3], s * u[2] + c * u[3]);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------

SeparationReport halfspace_separation(const SurfaceMesh& s1, const SurfaceMesh& s2, const CoordinateFrame& frame,
                                      double phi, double lambda, double b0, double radius, bool global_check) {
  const double inf = std::numeric_limits<double>::infinity();
  SeparationReport r;
  r.margins = {inf, inf, inf, inf};
  auto scan = [&](const SurfaceMesh& m, int upper_slot, int lower_slot, double sign) {
    for (const Vec4& x : m.vertices) {
      if (x.norm() > radius) continue;
      const double z = frame.e_z.dot(VecX(x)), w = frame.e_w.dot(VecX(x));
      const double slack = sign * (w - phi - lambda * b0 * z);
      if (global_check) {
        r.margins[upper_slot] = std::min(r.margins[upper_slot], slack);
        r.margins[lower_slot] = std::min(r.margins[lower_slot], slack);
      } else if (z >= 0.5) {
        r.margins[upper_slot] = std::min(r.margins[upper_slot], slack);
      } else if (z <= -0.5) {
        r.margins[lower_slot] = std::min(r.margins[lower_slot], -slack);
      }
    }
  };
  scan(s1, 0, 2, 1.0);
  scan(s2, 1, 3, -1.0);
  r.margin = *std::min_element(r.margins.begin(), r.margins.end());
  r.pass = r.margin > 0.0;
  return r;
}

SurfaceMesh tilted_plane(const PlanePairConfig& cfg, int j, double phi, double lambda, double b, double half_width,
                         int samples) {
  if (cfg.n != 2 || cfg.intersection_dim != 1) throw Error(ErrorCode::InvalidArgument, "tilted planes need an m = 1 pair in C^2");
  return parametric_surface(
      [&](double u, double v) {
        VecX y(2);
        y << u, v;
        VecX x = cfg.point(j, y);
        x += (phi + lambda * b * cfg.z(x)) * cfg.frame.e_w;
        return Vec4(x);
      },
      -half_width, half_width, -half_width, half_width, samples, samples);
}

namespace {

bool inside_triangle(double a, double b) { return a >= -1e-12 && b >= -1e-12 && a + b <= 1.0 + 1e-12; }

// Edge p + s d (s in [0, 1]) against triangle q0 + c f1 + e f2 in R^4.
bool edge_hits_triangle(const Vec4& p, const Vec4& d, const Vec4& q0, const Vec4& f1, const Vec4& f2, double R) {
  Eigen::Matrix<double, 4, 3> A;
  A << d, -f1, -f2;
  const Eigen::Vector3d x = A.colPivHouseholderQr().solve(q0 - p);
  if ((A * x - (q0 - p)).norm() > 1e-10 * (1.0 + (q0 - p).norm())) return false;
  if (x[0] < -1e-12 || x[0] > 1.0 + 1e-12 || !inside_triangle(x[1], x[2])) return false;
  return (p + x[0] * d).norm() < R;
}

}  // namespace

bool surfaces_intersect(const SurfaceMesh& a, const SurfaceMesh& b, double R) {
  auto bbox = [](const SurfaceMesh& m, const std::array<int, 3>& t) {
    Vec4 lo = m.vertices[t[0]], hi = lo;
    for (int k = 1; k < 3; ++k) {
      lo = lo.cwiseMin(m.vertices[t[k]]);
      hi = hi.cwiseMax(m.vertices[t[k]]);
    }
    return std::pair{lo, hi};
  };
  std::vector<std::pair<Vec4, Vec4>> boxes_b;
  for (const auto& t : b.triangles) boxes_b.push_back(bbox(b, t));
  for (const auto& ta : a.triangles) {
    const auto [alo, ahi] = bbox(a, ta);
    if (alo.cwiseAbs().maxCoeff() > R && (alo.array() > 0).all()) continue;
    const Vec4 p0 = a.vertices[ta[0]], e1 = a.vertices[ta[1]] - p0, e2 = a.vertices[ta[2]] - p0;
    for (std::size_t k = 0; k < b.triangles.size(); ++k) {
      const auto& [blo, bhi] = boxes_b[k];
      if (((alo.array() > bhi.array() + 1e-12) || (blo.array() > ahi.array() + 1e-12)).any()) continue;
      const auto& tb = b.triangles[k];
      const Vec4 q0 = b.vertices[tb[0]], f1 = b.vertices[tb[1]] - q0, f2 = b.vertices[tb[2]] - q0;
      Eigen::Matrix4d M;
      M << e1, e2, -f1, -f2;
      const double scale = e1.norm() * e2.norm() * f1.norm() * f2.norm();
      if (std::abs(M.determinant()) > 1e-10 * scale) {
        const Eigen::Vector4d x = M.partialPivLu().solve(q0 - p0);
        if (inside_triangle(x[0], x[1]) && inside_triangle(x[2], x[3]) && (p0 + x[0] * e1 + x[1] * e2).norm() < R)
          return true;
        continue;
      }
      // degenerate pair (shared 2-plane directions): test edges against the other triangle
      for (int s = 0; s < 3; ++s) {
        const Vec4 pa = a.vertices[ta[s]], da = a.vertices[ta[(s + 1) % 3]] - pa;
        if (edge_hits_triangle(pa, da, q0, f1, f2, R)) return true;
        const Vec4 pb = b.vertices[tb[s]], db = b.vertices[tb[(s + 1) % 3]] - pb;
        if (edge_hits_triangle(pb, db, p0, e1, e2, R)) return true;
      }
    }
  }
  return false;
}

}  // namespace lmcf
