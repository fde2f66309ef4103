#include "lmcf/geometry.hpp"

#include <algorithm>
#include <limits>

namespace lmcf {

VecX apply_j(const VecX& v) {
  VecX out(v.size());
  for (Eigen::Index k = 0; k + 1 < v.size(); k += 2) {
    out[k] = -v[k + 1];
    out[k + 1] = v[k];
  }
  return out;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

double Polyline::length() const {
  double s = 0.0;
  for (std::size_t i = 0; i < edge_count(); ++i) s += edge_length(i);
  return s;
}

double Polyline::min_edge() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < edge_count(); ++i) m = std::min(m, edge_length(i));
  return m;
}

double Polyline::mean_edge() const { return length() / static_cast<double>(edge_count()); }

std::size_t DiscreteCurve::vertex_count() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.size();
  return n;
}

double DiscreteCurve::length() const {
  double s = 0.0;
  for (const auto& c : components) s += c.length();
  return s;
}

double DiscreteCurve::min_edge() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : components) m = std::min(m, c.min_edge());
  return m;
}

double DiscreteCurve::mean_edge() const {
  double s = 0.0;
  std::size_t e = 0;
  for (const auto& c : components) {
    s += c.length();
    e += c.edge_count();
  }
  return s / static_cast<double>(e);
}

void validate(const DiscreteCurve& curve) {
  if (curve.components.empty()) throw Error(ErrorCode::InvalidCurve, "curve has no components");
  for (const auto& c : curve.components) {
    const std::size_t need = c.closed ? 8 : 3;
    if (c.size() < need)
      throw Error(ErrorCode::InvalidCurve, "component " + std::to_string(c.component_id) +
                                               " has " + std::to_string(c.size()) + " vertices");
    for (std::size_t i = 0; i < c.edge_count(); ++i) {
      if (!(c.edge_length(i) > 0.0))
        throw Error(ErrorCode::DegenerateEdge, "component " + std::to_string(c.component_id) +
                                                   " edge " + std::to_string(i));
    }
  }
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (const auto& v : values)
    for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

ScalarField make_field(const DiscreteCurve& curve, const std::string& name, double value) {
  ScalarField f;
  f.name = name;
  for (const auto& c : curve.components) f.values.emplace_back(c.size(), value);
  f.seam_jump.assign(curve.components.size(), 0.0);
  return f;
}

std::vector<double> edge_angles(const Polyline& p) {
  const std::size_t e = p.edge_count();
  std::vector<double> a(p.closed ? e + 1 : e);
  for (std::size_t i = 0; i < e; ++i) {
    const Vec2 d = p.edge(i);
    if (!(d.norm() > 0.0))
      throw Error(ErrorCode::DegenerateEdge, "edge " + std::to_string(i) + " has zero length");
    const double raw = std::atan2(d.y(), d.x());
    a[i] = i == 0 ? raw : a[i - 1] + wrap_angle(raw - a[i - 1]);
  }
  if (p.closed) a[e] = a[e - 1] + wrap_angle(a[0] - a[e - 1]);
  return a;
}

ScalarField lagrangian_angle(const DiscreteCurve& curve) {
  ScalarField theta;
  theta.name = "theta";
  theta.growth_degree = 0;
  for (const auto& c : curve.components) {
    const std::vector<double> a = edge_angles(c);
    const std::size_t n = c.size();
    std::vector<double> v(n);
    auto blend = [](double a_prev, double l_prev, double a_next, double l_next) {
      return (l_next * a_prev + l_prev * a_next) / (l_prev + l_next);
    };
    if (c.closed) {
      const std::size_t e = c.edge_count();
      const double jump = a[e] - a[0];
      v[0] = blend(a[e - 1] - jump, c.edge_length(e - 1), a[0], c.edge_length(0));
      for (std::size_t i = 1; i < n; ++i)
        v[i] = blend(a[i - 1], c.edge_length(i - 1), a[i], c.edge_length(i));
      theta.seam_jump.push_back(jump);
    } else {
      v[0] = a[0];
      v[n - 1] = a[n - 2];
      for (std::size_t i = 1; i + 1 < n; ++i)
        v[i] = blend(a[i - 1], c.edge_length(i - 1), a[i], c.edge_length(i));
      theta.seam_jump.push_back(0.0);
    }
    theta.values.push_back(std::move(v));
  }
  return theta;
}

VectorField mean_curvature(const DiscreteCurve& curve) {
  VectorField h;
  for (const auto& c : curve.components) {
    const std::size_t n = c.size();
    const std::size_t e = c.edge_count();
    std::vector<Vec2> t(e);
    std::vector<double> l(e);
    for (std::size_t i = 0; i < e; ++i) {
      l[i] = c.edge_length(i);
      if (!(l[i] > 0.0)) throw Error(ErrorCode::DegenerateEdge, "edge " + std::to_string(i));
      t[i] = c.edge(i) / l[i];
    }
    std::vector<Vec2> v(n, Vec2::Zero());
    if (c.closed) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + e - 1) % e;
        v[i] = 2.0 * (t[i] - t[ip]) / (l[ip] + l[i]);
      }
    } else {
      for (std::size_t i = 1; i + 1 < n; ++i) v[i] = 2.0 * (t[i] - t[i - 1]) / (l[i - 1] + l[i]);
      v[0] = v[1];
      v[n - 1] = v[n - 2];
    }
    h.values.push_back(std::move(v));
  }
  return h;
}

VectorField vertex_tangents(const DiscreteCurve& curve) {
  const ScalarField theta = lagrangian_angle(curve);
  VectorField t;
  for (const auto& v : theta.values) {
    std::vector<Vec2> tv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) tv[i] = Vec2(std::cos(v[i]), std::sin(v[i]));
    t.values.push_back(std::move(tv));
  }
  return t;
}

VectorField arclength_gradient(const DiscreteCurve& curve, const ScalarField& f) {
  const VectorField tangents = vertex_tangents(curve);
  VectorField g;
  for (std::size_t k = 0; k < curve.components.size(); ++k) {
    const auto& c = curve.components[k];
    const auto& fv = f.values[k];
    const std::size_t n = c.size();
    std::vector<Vec2> gv(n);
    if (c.closed) {
      const double jump = k < f.seam_jump.size() ? f.seam_jump[k] : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + n - 1) % n;
        const std::size_t in = (i + 1) % n;
        const double prev = i == 0 ? fv[ip] - jump : fv[ip];
        const double next = i == n - 1 ? fv[in] + jump : fv[in];
        const double span = c.edge_length(ip) + c.edge_length(i);
        gv[i] = (next - prev) / span * tangents.values[k][i];
      }
    } else {
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double span = c.edge_length(i - 1) + c.edge_length(i);
        gv[i] = (fv[i + 1] - fv[i - 1]) / span * tangents.values[k][i];
      }
      gv[0] = (fv[1] - fv[0]) / c.edge_length(0) * tangents.values[k][0];
      gv[n - 1] = (fv[n - 1] - fv[n - 2]) / c.edge_length(n - 2) * tangents.values[k][n - 1];
    }
    g.values.push_back(std::move(gv));
  }
  return g;
}

std::vector<std::vector<double>> dual_lengths(const DiscreteCurve& curve) {
  std::vector<std::vector<double>> out;
  for (const auto& c : curve.components) {
    const std::size_t n = c.size();
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < c.edge_count(); ++i) {
      const double l = 0.5 * c.edge_length(i);
      d[i] += l;
      d[(i + 1) % n] += l;
    }
    out.push_back(std::move(d));
  }
  return out;
}

double liouville_edge_integral(const Vec2& p, const Vec2& q) { return cross(p, q); }

std::vector<double> liouville_holonomy(const DiscreteCurve& curve) {
  std::vector<double> h;
  for (const auto& c : curve.components) {
    double s = 0.0;
    if (c.closed)
      for (std::size_t i = 0; i < c.size(); ++i)
        s += liouville_edge_integral(c.vertices[i], c.vertices[(i + 1) % c.size()]);
    h.push_back(s);
  }
  return h;
}

ScalarField exactness_primitive(const DiscreteCurve& curve, const ExactnessOptions& opts) {
  ScalarField beta;
  beta.name = "beta";
  beta.growth_degree = 2;
  const std::vector<double> hol = liouville_holonomy(curve);
  for (std::size_t k = 0; k < curve.components.size(); ++k) {
    const auto& c = curve.components[k];
    if (c.closed && std::abs(hol[k]) > opts.holonomy_tolerance * c.length())
      throw NotExactError(c.component_id, hol[k]);
    std::vector<double> b(c.size(), 0.0);
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
      b[i + 1] = b[i] + liouville_edge_integral(c.vertices[i], c.vertices[i + 1]);
    if (k < opts.anchors.size() && opts.anchors[k]) {
      const auto [idx, value] = *opts.anchors[k];
      const double shift = value - b.at(idx);
      for (double& x : b) x += shift;
    }
    beta.values.push_back(std::move(b));
    beta.seam_jump.push_back(0.0);
  }
  return beta;
}

Vec2 normal_projection(const DiscreteCurve& curve, std::size_t component, std::size_t vertex) {
  const ScalarField theta = lagrangian_angle(curve);
  const double a = theta.values.at(component).at(vertex);
  const Vec2 t(std::cos(a), std::sin(a));
  const Vec2 x = curve.components[component].vertices[vertex];
  return x - x.dot(t) * t;
}

std::size_t nearest_origin_vertex(const Polyline& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p.vertices[i].squaredNorm() < p.vertices[best].squaredNorm()) best = i;
  return best;
}

double angle_oscillation(const ScalarField& theta) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : theta.values)
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  return hi - lo;
}

AffineLine line_through_origin(double angle) {
  AffineLine l;
  l.direction = Vec2(std::cos(angle), std::sin(angle));
  return l;
}

std::vector<Vec2> factor_points(const Factor& f, const std::vector<double>& line_params) {
  std::vector<Vec2> pts;
  if (const auto* c = std::get_if<DiscreteCurve>(&f)) {
    for (const auto& comp : c->components)
      pts.insert(pts.end(), comp.vertices.begin(), comp.vertices.end());
  } else {
    const auto& l = std::get<AffineLine>(f);
    for (double s : line_params) pts.push_back(l.at(s));
  }
  return pts;
}

static std::vector<std::vector<double>> factor_angles(const Factor& f) {
  if (const auto* c = std::get_if<DiscreteCurve>(&f)) return lagrangian_angle(*c).values;
  return {{std::get<AffineLine>(f).angle()}};
}

ProductField product_angle(const ProductLagrangian& L) {
  const auto a1 = factor_angles(L.first);
  const auto a2 = factor_angles(L.second);
  ProductField out;
  for (const auto& u : a1) {
    std::vector<MatX> row;
    for (const auto& v : a2) {
      MatX m(u.size(), v.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] + v[j];
      row.push_back(std::move(m));
    }
    out.blocks.push_back(std::move(row));
  }
  return out;
}

Vec4 product_mean_curvature(const VectorField& h1, std::size_t c1, std::size_t i,
                            const VectorField& h2, std::size_t c2, std::size_t j) {
  const Vec2 a = h1.values.at(c1).at(i);
  const Vec2 b = h2.values.at(c2).at(j);
  return Vec4(a.x(), a.y(), b.x(), b.y());
}

}  // namespace lmcf
