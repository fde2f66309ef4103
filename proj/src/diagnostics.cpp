#include "lmcf/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace lmcf {

namespace {

// 8-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 8> gl_x = {0.0198550717512319, 0.1016667612931866, 0.2372337950418355,
                                        0.4082826787521751, 0.5917173212478249, 0.7627662049581645,
                                        0.8983332387068134, 0.9801449282487681};
constexpr std::array<double, 8> gl_w = {0.0506142681451881, 0.1111905172266872, 0.1568533229389436,
                                        0.1813418916891810, 0.1813418916891810, 0.1568533229389436,
                                        0.1111905172266872, 0.0506142681451881};

double segment_distance(const Vec2& q, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double l2 = d.squaredNorm();
  const double s = l2 > 0 ? std::clamp((q - a).dot(d) / l2, 0.0, 1.0) : 0.0;
  return (q - (a + s * d)).norm();
}

// Integrates g(edge component k, edge e, u in [0,1], x, unit tangent) * gauss over every edge
// that reaches inside the truncation radius.
template <class G>
double integrate_curve(const DiscreteCurve& c, const Vec2& a, double s, G&& g) {
  const double radius = truncation_radius(s);
  const double norm = 1.0 / std::sqrt(4.0 * pi * s);
  const double panel = 0.25 * std::sqrt(s);
  double total = 0.0;
  for (std::size_t k = 0; k < c.components.size(); ++k) {
    const Polyline& p = c.components[k];
    for (std::size_t e = 0; e < p.edge_count(); ++e) {
      const Vec2 x0 = p.vertices[e];
      const Vec2 x1 = p.vertices[(e + 1) % p.size()];
      if (segment_distance(a, x0, x1) > radius) continue;
      const double len = (x1 - x0).norm();
      const Vec2 t = (x1 - x0) / len;
      const auto m = static_cast<int>(std::max(1.0, std::ceil(len / panel)));
      double acc = 0.0;
      for (int j = 0; j < m; ++j)
        for (std::size_t q = 0; q < gl_x.size(); ++q) {
          const double u = (j + gl_x[q]) / m;
          const Vec2 x = x0 + u * (x1 - x0);
          acc += gl_w[q] * g(k, e, u, x, t) * std::exp(-(x - a).squaredNorm() / (4.0 * s));
        }
      total += acc * len / m;
    }
  }
  return total * norm;
}

double vertex_value(const ScalarField& f, const Polyline& p, std::size_t k, std::size_t e, double u) {
  const auto& v = f.values[k];
  const std::size_t j = (e + 1) % p.size();
  double fj = v[j];
  if (p.closed && j == 0 && k < f.seam_jump.size()) fj += f.seam_jump[k];
  return (1.0 - u) * v[e] + u * fj;
}

Vec2 vertex_vector(const VectorField& f, const Polyline& p, std::size_t k, std::size_t e, double u) {
  return (1.0 - u) * f.values[k][e] + u * f.values[k][(e + 1) % p.size()];
}

void check_window(double t, const GaussianWindow& w) {
  if (!(t < w.t0))
    throw Error(ErrorCode::WindowInPast, "evaluation time " + std::to_string(t) +
                                             " is not before the window time " + std::to_string(w.t0));
}

Vec2 head(const VecX& v, int offset) { return Vec2(v[offset], v[offset + 1]); }

// Dissipation density along a curve factor: |H + (x - a)^perp / (2 s)|^2.
double factor_dissipation(const DiscreteCurve& c, const Vec2& a, double s, const ScalarField* weight) {
  const VectorField h = mean_curvature(c);
  return integrate_curve(c, a, s, [&](std::size_t k, std::size_t e, double u, const Vec2& x, const Vec2& t) {
    const Polyline& p = c.components[k];
    const Vec2 d = x - a;
    const Vec2 v = vertex_vector(h, p, k, e, u) + (d - d.dot(t) * t) / (2.0 * s);
    const double f = weight ? vertex_value(*weight, p, k, e, u) : 1.0;
    return f * v.squaredNorm();
  });
}

double factor_dissipation(const Factor& f, const Vec2& a, double s) {
  if (const auto* c = std::get_if<DiscreteCurve>(&f)) return factor_dissipation(*c, a, s, nullptr);
  // Lines through a have zero dissipation; in general |(x - a)^perp|^2 = dist^2 is constant.
  const auto& l = std::get<AffineLine>(f);
  const double dist = cross(l.direction, a - l.point);
  return dist * dist / (4.0 * s * s) * factor_gaussian_integral(l, a, s);
}

}  // namespace

double truncation_radius(double s) { return std::sqrt(4.0 * s * std::log(1e16)); }

double factor_gaussian_integral(const DiscreteCurve& c, const Vec2& a, double s, const ScalarField* weight) {
  return integrate_curve(c, a, s, [&](std::size_t k, std::size_t e, double u, const Vec2&, const Vec2&) {
    return weight ? vertex_value(*weight, c.components[k], k, e, u) : 1.0;
  });
}

double factor_gaussian_integral(const AffineLine& l, const Vec2& a, double s) {
  // Same composite rule on the truncation window around the foot point.
  const double s0 = (a - l.point).dot(l.direction);
  const Vec2 foot = l.at(s0);
  const double d2 = (foot - a).squaredNorm();
  const double radius = truncation_radius(s);
  if (d2 > radius * radius) return 0.0;
  const double half = std::sqrt(radius * radius - d2);
  DiscreteCurve seg{{Polyline{{l.at(s0 - half), foot, l.at(s0 + half)}, false, 0}}};
  return factor_gaussian_integral(seg, a, s);
}

double factor_gaussian_integral(const Factor& f, const Vec2& a, double s) {
  if (const auto* c = std::get_if<DiscreteCurve>(&f)) return factor_gaussian_integral(*c, a, s);
  return factor_gaussian_integral(std::get<AffineLine>(f), a, s);
}

double gaussian_density_ratio(const DiscreteCurve& state, double t, const GaussianWindow& w) {
  check_window(t, w);
  return factor_gaussian_integral(state, head(w.x0, 0), w.t0 - t);
}

double gaussian_density_ratio(const ProductLagrangian& L, double t, const GaussianWindow& w) {
  check_window(t, w);
  const double s = w.t0 - t;
  return factor_gaussian_integral(L.first, head(w.x0, 0), s) *
         factor_gaussian_integral(L.second, head(w.x0, 2), s);
}

double gaussian_density_ratio(const std::vector<ProductLagrangian>& pieces, double t,
                              const GaussianWindow& w) {
  double total = 0.0;
  for (const auto& p : pieces) total += gaussian_density_ratio(p, t, w);
  return total;
}

// ---------------------------------------------------------------------------------------------
// Entropy.

namespace {

std::vector<Vec2> center_candidates(const DiscreteCurve& c, const EntropyOptions& o, std::mt19937_64& rng) {
  std::vector<Vec2> out;
  std::vector<Vec2> all;
  for (const auto& p : c.components) {
    Vec2 centroid = Vec2::Zero();
    for (const auto& v : p.vertices) {
      centroid += v;
      all.push_back(v);
    }
    out.push_back(centroid / static_cast<double>(p.size()));
  }
  const std::size_t stride = std::max<std::size_t>(1, all.size() / static_cast<std::size_t>(o.max_centers));
  for (std::size_t i = 0; i < all.size(); i += stride) out.push_back(all[i]);
  // crossing points of non-adjacent edges
  std::vector<std::pair<Vec2, Vec2>> segs;
  for (const auto& p : c.components)
    for (std::size_t e = 0; e < p.edge_count(); ++e) segs.emplace_back(p.vertices[e], p.vertices[(e + 1) % p.size()]);
  for (std::size_t i = 0; i < segs.size() && out.size() < 4u * o.max_centers; ++i)
    for (std::size_t j = i + 2; j < segs.size(); ++j) {
      const Vec2 r = segs[i].second - segs[i].first;
      const Vec2 q = segs[j].second - segs[j].first;
      const double den = cross(r, q);
      if (den == 0.0) continue;
      const Vec2 d = segs[j].first - segs[i].first;
      const double u = cross(d, q) / den, v = cross(d, r) / den;
      if (u > 0 && u < 1 && v > 0 && v < 1) out.push_back(segs[i].first + u * r);
    }
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  std::normal_distribution<double> g(0.0, 5.0 * c.mean_edge());
  for (int i = 0; i < o.random_centers; ++i) out.push_back(all[pick(rng)] + Vec2(g(rng), g(rng)));
  return out;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters, double& arg) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  arg = fc > fd ? c : d;
  return std::max(fc, fd);
}

struct Start {
  double value;
  Vec2 center;
  double log_s;
};

}  // namespace

EntropyResult entropy(const DiscreteCurve& c, const EntropyOptions& o) {
  std::mt19937_64 rng(o.seed);
  const std::vector<Vec2> centers = center_candidates(c, o, rng);
  Vec2 lo = c.components[0].vertices[0], hi = lo;
  for (const auto& p : c.components)
    for (const auto& v : p.vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  const double diam = (hi - lo).norm();
  const double ls_min = std::log(std::pow(2.0 * c.mean_edge(), 2));
  const double ls_max = std::log(diam * diam);
  const double step = (ls_max - ls_min) / (o.scale_grid - 1);

  EntropyResult res;
  auto eval = [&](const Vec2& a, double log_s) {
    ++res.evaluations;
    return factor_gaussian_integral(c, a, std::exp(log_s));
  };
  std::vector<Start> starts;
  for (const auto& a : centers)
    for (int i = 0; i < o.scale_grid; ++i) {
      const double ls = ls_min + i * step;
      starts.push_back({eval(a, ls), a, ls});
    }
  std::sort(starts.begin(), starts.end(), [](const Start& x, const Start& y) { return x.value > y.value; });
  starts.resize(std::min<std::size_t>(starts.size(), 6));

  Start best = starts.front();
  for (Start s : starts) {
    for (int round = 0; round < 4; ++round) {
      double arg = s.log_s;
      const double v = golden_max([&](double ls) { return eval(s.center, ls); },
                                  std::max(ls_min - step, s.log_s - step), s.log_s + step, 40, arg);
      if (v > s.value) {
        s.value = v;
        s.log_s = arg;
      }
      double h = 0.5 * std::exp(0.5 * s.log_s);
      for (int it = 0; it < 40 && h > 1e-10; ++it) {
        bool moved = false;
        for (const Vec2& d : {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1)}) {
          const double v2 = eval(s.center + h * d, s.log_s);
          if (v2 > s.value) {
            s.value = v2;
            s.center += h * d;
            moved = true;
          }
        }
        if (!moved) h *= 0.5;
      }
    }
    if (s.value > best.value) best = s;
  }
  res.value = best.value;
  res.center = best.center;
  res.scale = std::exp(best.log_s);
  return res;
}

EntropyResult entropy(const ProductLagrangian& L, const EntropyOptions& o) {
  const auto* c1 = std::get_if<DiscreteCurve>(&L.first);
  const auto* c2 = std::get_if<DiscreteCurve>(&L.second);
  if (c1 && !c2) {
    EntropyResult r = entropy(*c1, o);
    const auto& l = std::get<AffineLine>(L.second);
    VecX x(4);
    x << r.center, l.point;
    r.center = x;
    return r;
  }
  if (c2 && !c1) {
    EntropyResult r = entropy(*c2, o);
    const auto& l = std::get<AffineLine>(L.first);
    VecX x(4);
    x << l.point, r.center;
    r.center = x;
    return r;
  }
  if (!c1 && !c2) {
    EntropyResult r;
    r.value = 1.0;
    r.center = VecX::Zero(4);
    r.scale = 1.0;
    return r;
  }
  // The kernel factorizes, so for fixed s the sup over centers splits; scan s jointly.
  EntropyResult best;
  std::mt19937_64 rng(o.seed);
  const auto cand1 = center_candidates(*c1, o, rng);
  const auto cand2 = center_candidates(*c2, o, rng);
  const double ls_min = std::log(std::pow(2.0 * std::max(c1->mean_edge(), c2->mean_edge()), 2));
  const double ls_max = std::log(std::pow(std::max(c1->length(), c2->length()), 2));
  for (int i = 0; i < o.scale_grid; ++i) {
    const double s = std::exp(ls_min + (ls_max - ls_min) * i / (o.scale_grid - 1));
    double m1 = 0.0, m2 = 0.0;
    Vec2 a1 = Vec2::Zero(), a2 = Vec2::Zero();
    for (const auto& a : cand1)
      if (double v = factor_gaussian_integral(*c1, a, s); v > m1) m1 = v, a1 = a;
    for (const auto& a : cand2)
      if (double v = factor_gaussian_integral(*c2, a, s); v > m2) m2 = v, a2 = a;
    best.evaluations += static_cast<int>(cand1.size() + cand2.size());
    if (m1 * m2 > best.value) {
      best.value = m1 * m2;
      best.center = VecX(4);
      best.center << a1, a2;
      best.scale = s;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------------------------
// Monotonicity.

double polynomial_growth_constant(const DiscreteCurve& c, const ScalarField& f, int degree) {
  double m = 0.0;
  for (std::size_t k = 0; k < c.components.size(); ++k)
    for (std::size_t i = 0; i < c.components[k].size(); ++i) {
      const double v = f.values[k][i];
      if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
      m = std::max(m, std::abs(v) / (1.0 + std::pow(c.components[k].vertices[i].norm(), degree)));
    }
  return m;
}

namespace {

void finish_report(MonotonicityReport& r, const MonotonicityOptions& o) {
  const std::size_t n = r.times.size();
  r.bound.assign(n, 0.0);
  r.step_pass.assign(n, 1);
  r.pass = true;
  r.max_violation = 0.0;
  double mismatch = 0.0;
  bool any = false;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = r.times[k + 1] - r.times[k];
    const double inc = r.values[k + 1] - r.values[k];
    const double src = 0.5 * dt * (r.source[k] + r.source[k + 1]);
    const double diss = 0.5 * dt * (r.dissipation[k] + r.dissipation[k + 1]);
    const double scale = std::max(std::abs(r.values[k]), 1e-300);
    r.bound[k + 1] = src + o.value_tolerance * scale;
    const double excess = (inc - src) / scale;
    r.max_violation = std::max(r.max_violation, excess);
    if (inc > r.bound[k + 1]) {
      r.step_pass[k + 1] = 0;
      r.pass = false;
    }
    if (0.5 * std::abs(r.dissipation[k] + r.dissipation[k + 1]) > 1e-3 * scale) {
      any = true;
      mismatch = std::max(mismatch, std::abs((src - inc) - diss) / std::abs(diss));
    }
  }
  r.dissipation_mismatch = any ? mismatch : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

MonotonicityReport monotonicity_audit(const FlowTrajectory& traj, const GaussianWindow& w,
                                      const std::vector<ScalarField>* f,
                                      const std::vector<ScalarField>* residual,
                                      const MonotonicityOptions& o) {
  if (traj.mode != TimeMode::Unrescaled)
    throw Error(ErrorCode::InvalidArgument, "monotonicity audit expects unrescaled time");
  MonotonicityReport r;
  const Vec2 a = head(w.x0, 0);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    check_window(t, w);
    const double s = w.t0 - t;
    const DiscreteCurve& c = traj.states[k];
    const ScalarField* fk = f ? &(*f)[k] : nullptr;
    if (fk) {
      const double C = polynomial_growth_constant(c, *fk, fk->growth_degree);
      r.growth_constant = std::max(r.growth_constant, C);
      if (!(C <= o.growth_limit))
        throw Error(ErrorCode::GrowthUnbounded, "field " + fk->name + " violates its degree-" +
                                                    std::to_string(fk->growth_degree) + " growth bound");
    }
    r.times.push_back(t);
    r.values.push_back(factor_gaussian_integral(c, a, s, fk));
    r.dissipation.push_back(factor_dissipation(c, a, s, fk));
    r.source.push_back(residual ? factor_gaussian_integral(c, a, s, &(*residual)[k]) : 0.0);
  }
  finish_report(r, o);
  return r;
}

MonotonicityReport monotonicity_audit(const ProductTrajectory& traj, const GaussianWindow& w,
                                      const MonotonicityOptions& o) {
  MonotonicityReport r;
  const Vec2 a = head(w.x0, 0), b = head(w.x0, 2);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    check_window(t, w);
    const double s = w.t0 - t;
    const ProductLagrangian L = traj.state(k);
    const double i1 = factor_gaussian_integral(L.first, a, s);
    const double i2 = factor_gaussian_integral(L.second, b, s);
    r.times.push_back(t);
    r.values.push_back(i1 * i2);
    r.dissipation.push_back(factor_dissipation(L.first, a, s) * i2 + i1 * factor_dissipation(L.second, b, s));
    r.source.push_back(0.0);
  }
  finish_report(r, o);
  return r;
}

// ---------------------------------------------------------------------------------------------
// Translator fit.

namespace {

struct Sample {
  double w, theta, weight;
  VecX h;       // mean curvature
  VecX ez_perp; // normal part of e_z
};

TranslatorFit fit_samples(const std::vector<Sample>& s, int component) {
  TranslatorFit fit;
  fit.component = component;
  double W = 0, mt = 0, mw = 0;
  for (const auto& x : s) {
    W += x.weight;
    mt += x.weight * x.theta;
    mw += x.weight * x.w;
  }
  mt /= W;
  mw /= W;
  double stt = 0, stw = 0, sww = 0, rms = 0;
  for (const auto& x : s) {
    stt += x.weight * (x.theta - mt) * (x.theta - mt);
    stw += x.weight * (x.theta - mt) * (x.w - mw);
    sww += x.weight * (x.w - mw) * (x.w - mw);
    rms += x.weight * x.w * x.w;
  }
  fit.rms_w = std::sqrt(rms / W);
  const double theta_scale = std::max(1.0, std::abs(mt));
  if (stt <= 1e-24 * W * theta_scale * theta_scale) {
    fit.b = 0.0;
    fit.a = mw;
    fit.residual = std::sqrt(sww / W);
    fit.degenerate = fit.residual > 1e-12 * std::max(1.0, std::abs(mw));
    if (fit.degenerate) fit.b = std::numeric_limits<double>::quiet_NaN();
  } else {
    fit.b = stw / stt;
    fit.a = mw - fit.b * mt;
    double res = 0;
    for (const auto& x : s) {
      const double d = x.w - fit.a - fit.b * x.theta;
      res += x.weight * d * d;
    }
    fit.residual = std::sqrt(res / W);
  }
  double num = 0, den = 0;
  for (const auto& x : s) {
    num += x.weight * x.h.dot(x.ez_perp);
    den += x.weight * x.ez_perp.squaredNorm();
  }
  fit.kappa_measured = den > 0 ? num / den : 0.0;
  if (!fit.degenerate && fit.b != 0.0) {
    double v = 0;
    for (const auto& x : s) v += x.weight * (x.h + x.ez_perp / fit.b).squaredNorm();
    fit.velocity_residual = std::sqrt(v / W);
  } else {
    fit.velocity_residual = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

struct FactorSamples {
  std::vector<std::vector<Vec2>> points, tangents, curvature;
  std::vector<std::vector<double>> theta, weight;
};

FactorSamples factor_samples(const Factor& f) {
  FactorSamples out;
  if (const auto* c = std::get_if<DiscreteCurve>(&f)) {
    const ScalarField th = lagrangian_angle(*c);
    const VectorField h = mean_curvature(*c);
    const VectorField t = vertex_tangents(*c);
    const auto dual = dual_lengths(*c);
    for (std::size_t k = 0; k < c->components.size(); ++k) {
      const Polyline& p = c->components[k];
      const std::size_t lo = p.closed ? 0 : 2, hi = p.closed ? p.size() : p.size() - 2;
      std::vector<Vec2> pts, tan, cur;
      std::vector<double> ang, wt;
      for (std::size_t i = lo; i < hi; ++i) {
        pts.push_back(p.vertices[i]);
        tan.push_back(t.values[k][i]);
        cur.push_back(h.values[k][i]);
        ang.push_back(th.values[k][i]);
        wt.push_back(dual[k][i]);
      }
      out.points.push_back(pts);
      out.tangents.push_back(tan);
      out.curvature.push_back(cur);
      out.theta.push_back(ang);
      out.weight.push_back(wt);
    }
  } else {
    const auto& l = std::get<AffineLine>(f);
    std::vector<Vec2> pts, tan, cur;
    std::vector<double> ang, wt;
    for (int i = -10; i <= 10; ++i) {
      pts.push_back(l.at(0.1 * i));
      tan.push_back(l.direction);
      cur.push_back(Vec2::Zero());
      ang.push_back(l.angle());
      wt.push_back(0.1);
    }
    out.points.push_back(pts);
    out.tangents.push_back(tan);
    out.curvature.push_back(cur);
    out.theta.push_back(ang);
    out.weight.push_back(wt);
  }
  return out;
}

}  // namespace

std::vector<TranslatorFit> translator_fit(const DiscreteCurve& c, const Vec2& e_z) {
  const Vec2 e_w = rotate_j(e_z);
  const FactorSamples fs = factor_samples(c);
  std::vector<TranslatorFit> out;
  for (std::size_t k = 0; k < fs.points.size(); ++k) {
    std::vector<Sample> s;
    for (std::size_t i = 0; i < fs.points[k].size(); ++i) {
      const Vec2 t = fs.tangents[k][i];
      s.push_back({e_w.dot(fs.points[k][i]), fs.theta[k][i], fs.weight[k][i], fs.curvature[k][i],
                   e_z - e_z.dot(t) * t});
    }
    out.push_back(fit_samples(s, c.components[k].component_id));
  }
  return out;
}

std::vector<TranslatorFit> translator_fit(const ProductLagrangian& L, const CoordinateFrame& frame) {
  if (frame.e_z.size() != 4 || frame.e_w.size() != 4)
    throw Error(ErrorCode::BadFrame, "product translator fit needs a frame in R^4");
  if ((frame.e_w - apply_j(frame.e_z)).norm() > 1e-12)
    throw Error(ErrorCode::BadFrame, "e_w must equal J e_z");
  const FactorSamples f1 = factor_samples(L.first), f2 = factor_samples(L.second);
  std::vector<TranslatorFit> out;
  int id = 0;
  for (std::size_t k1 = 0; k1 < f1.points.size(); ++k1)
    for (std::size_t k2 = 0; k2 < f2.points.size(); ++k2, ++id) {
      std::vector<Sample> s;
      for (std::size_t i = 0; i < f1.points[k1].size(); ++i)
        for (std::size_t j = 0; j < f2.points[k2].size(); ++j) {
          Vec4 x, t1, t2, h;
          x << f1.points[k1][i], f2.points[k2][j];
          t1 << f1.tangents[k1][i], 0, 0;
          t2 << 0, 0, f2.tangents[k2][j];
          h << f1.curvature[k1][i], f2.curvature[k2][j];
          const VecX ez = frame.e_z;
          const VecX perp = ez - ez.dot(t1) * VecX(t1) - ez.dot(t2) * VecX(t2);
          s.push_back({frame.e_w.dot(VecX(x)), f1.theta[k1][i] + f2.theta[k2][j],
                       f1.weight[k1][i] * f2.weight[k2][j], VecX(h), perp});
        }
      out.push_back(fit_samples(s, id));
    }
  return out;
}

}  // namespace lmcf
