#include "lmcf/flow.hpp"

#include "fem1d.hpp"

#include <algorithm>
#include <cmath>

namespace lmcf {

const char* scheme_name(Scheme s) { return s == Scheme::Explicit ? "explicit" : "semi-implicit"; }

namespace {

Vec2 end_position(const FlowBoundary& b, std::size_t comp, int which, double t, const Vec2& current) {
  if (comp >= b.ends.size()) return current;
  const EndCondition& e = b.ends[comp][which];
  if (e.kind == EndCondition::Kind::Prescribed) return e.path(t);
  return current;
}

}  // namespace

DiscreteCurve step_flow(const DiscreteCurve& state, double t, double dt, const FlowOptions& opts,
                        const FlowBoundary& boundary, double reference_edge) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  DiscreteCurve next = state;
  if (opts.scheme == Scheme::Explicit) {
    const double h = state.min_edge();
    if (dt > opts.stability_constant * h * h)
      throw Error(ErrorCode::StabilityViolation,
                  "dt = " + std::to_string(dt) + " exceeds " + std::to_string(opts.stability_constant) +
                      " h_min^2 = " + std::to_string(opts.stability_constant * h * h));
    const VectorField hf = mean_curvature(state);
    for (std::size_t k = 0; k < state.components.size(); ++k) {
      auto& c = next.components[k];
      for (std::size_t i = 0; i < c.size(); ++i) c.vertices[i] += dt * hf.values[k][i];
      if (!c.closed) {
        c.vertices.front() = end_position(boundary, k, 0, t + dt, state.components[k].vertices.front());
        c.vertices.back() = end_position(boundary, k, 1, t + dt, state.components[k].vertices.back());
      }
    }
  } else {
    for (std::size_t k = 0; k < state.components.size(); ++k) {
      const Polyline& c = state.components[k];
      const auto n = static_cast<Eigen::Index>(c.size());
      const fem1d::Operators ops = fem1d::assemble(c);
      MatX x(n, 2);
      for (Eigen::Index i = 0; i < n; ++i) x.row(i) = c.vertices[i].transpose();
      std::vector<char> fixed(n, 0);
      MatX xf = x;
      if (!c.closed) {
        fixed.front() = fixed.back() = 1;
        xf.row(0) = end_position(boundary, k, 0, t + dt, c.vertices.front()).transpose();
        xf.row(n - 1) = end_position(boundary, k, 1, t + dt, c.vertices.back()).transpose();
      }
      const MatX xn = fem1d::implicit_solve(ops, dt, x, fixed, xf);
      for (Eigen::Index i = 0; i < n; ++i) next.components[k].vertices[i] = xn.row(i).transpose();
    }
  }
  const double m = next.min_edge();
  if (!(m >= opts.collapse_ratio * reference_edge))
    throw Error(ErrorCode::SingularCollapse,
                "min edge " + std::to_string(m) + " below " + std::to_string(opts.collapse_ratio) +
                    " x initial mean edge at t = " + std::to_string(t + dt));
  return next;
}

FlowTrajectory evolve(const DiscreteCurve& initial, double t0, double t1, double dt,
                      const FlowOptions& opts, const FlowBoundary& boundary, int record_every) {
  validate(initial);
  if (!(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "empty time interval");
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
  const double step = (t1 - t0) / static_cast<double>(steps);
  const double ref = initial.mean_edge();

  FlowTrajectory traj;
  traj.meta.scheme = scheme_name(opts.scheme);
  traj.meta.dt = step;
  traj.meta.h = ref;
  traj.meta.redistribute_every = opts.redistribute_every;
  traj.meta.stability_constant = opts.stability_constant;
  traj.times.push_back(t0);
  traj.states.push_back(initial);
  traj.remeshed.push_back(0);

  DiscreteCurve cur = initial;
  bool remeshed_since_record = false;
  for (long s = 1; s <= steps; ++s) {
    const double t = t0 + static_cast<double>(s - 1) * step;
    cur = step_flow(cur, t, step, opts, boundary, ref);
    if (opts.redistribute_every > 0 && s % opts.redistribute_every == 0) {
      cur = redistribute(cur);
      remeshed_since_record = true;
    }
    if (opts.audit_embeddedness && !traj.meta.first_crossing_time && has_self_intersection(cur))
      traj.meta.first_crossing_time = t + step;
    if (s % record_every == 0 || s == steps) {
      traj.times.push_back(s == steps ? t1 : t0 + static_cast<double>(s) * step);
      traj.states.push_back(cur);
      traj.remeshed.push_back(remeshed_since_record ? 1 : 0);
      remeshed_since_record = false;
    }
  }
  return traj;
}

FlowTrajectory sample_trajectory(const std::function<DiscreteCurve(double)>& exact,
                                 const std::vector<double>& times) {
  FlowTrajectory traj;
  traj.meta.scheme = "exact";
  for (double t : times) {
    traj.times.push_back(t);
    traj.states.push_back(exact(t));
    traj.remeshed.push_back(0);
  }
  if (times.size() > 1) traj.meta.dt = times[1] - times[0];
  if (!traj.states.empty()) traj.meta.h = traj.states.front().mean_edge();
  return traj;
}

FlowTrajectory static_trajectory(const DiscreteCurve& state, const std::vector<double>& times) {
  return sample_trajectory([&](double) { return state; }, times);
}

DiscreteCurve scale_curve(const DiscreteCurve& c, double lambda) {
  DiscreteCurve out = c;
  for (auto& comp : out.components)
    for (auto& v : comp.vertices) v *= lambda;
  return out;
}

FlowTrajectory parabolic_rescale(const FlowTrajectory& traj, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (traj.mode != TimeMode::Unrescaled)
    throw Error(ErrorCode::InvalidArgument, "parabolic rescaling acts on unrescaled trajectories");
  FlowTrajectory out = traj;
  for (auto& t : out.times) t *= lambda * lambda;
  for (auto& s : out.states) s = scale_curve(s, lambda);
  out.meta.dt *= lambda * lambda;
  out.meta.h *= lambda;
  if (out.meta.first_crossing_time) *out.meta.first_crossing_time *= lambda * lambda;
  return out;
}

DiscreteCurve interpolate_state(const FlowTrajectory& traj, double t) {
  const auto& ts = traj.times;
  if (ts.empty() || t < ts.front() || t > ts.back())
    throw Error(ErrorCode::RangeError, "time " + std::to_string(t) + " outside the trajectory");
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  std::size_t k = static_cast<std::size_t>(it - ts.begin());
  if (ts[k] == t) return traj.states[k];
  const double a = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
  DiscreteCurve out = traj.states[k - 1];
  for (std::size_t c = 0; c < out.components.size(); ++c)
    for (std::size_t i = 0; i < out.components[c].size(); ++i)
      out.components[c].vertices[i] = (1.0 - a) * traj.states[k - 1].components[c].vertices[i] +
                                      a * traj.states[k].components[c].vertices[i];
  return out;
}

FlowTrajectory to_rescaled(const FlowTrajectory& traj, double tau_begin, double tau_end, double dtau) {
  if (traj.mode != TimeMode::Unrescaled)
    throw Error(ErrorCode::InvalidArgument, "trajectory is already rescaled");
  if (!(tau_end >= tau_begin) || !(dtau > 0.0))
    throw Error(ErrorCode::InvalidArgument, "bad tau window");
  const auto count = static_cast<long>(std::llround((tau_end - tau_begin) / dtau)) + 1;
  const double t_first = -std::exp(-tau_begin);
  const double t_last = -std::exp(-tau_end);
  if (traj.times.empty() || t_first < traj.times.front() || t_last > traj.times.back() || t_last >= 0.0)
    throw Error(ErrorCode::RangeError, "trajectory does not cover the tau window");

  FlowTrajectory out;
  out.mode = TimeMode::Rescaled;
  out.meta = traj.meta;
  out.meta.dt = dtau;
  for (long k = 0; k < count; ++k) {
    const double tau = tau_begin + static_cast<double>(k) * dtau;
    const double t = -std::exp(-tau);
    out.times.push_back(tau);
    out.states.push_back(scale_curve(interpolate_state(traj, t), std::exp(0.5 * tau)));
    out.remeshed.push_back(0);
  }
  double worst = 0.0;
  for (double d : rescaled_velocity_defect(out))
    if (std::isfinite(d)) worst = std::max(worst, d);
  out.meta.velocity_defect = worst;
  return out;
}

std::vector<double> rescaled_velocity_defect(const FlowTrajectory& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> out(r.size(), nan);
  for (std::size_t k = 1; k + 1 < r.size(); ++k) {
    const DiscreteCurve& s = r.states[k];
    const VectorField h = mean_curvature(s);
    const VectorField tan = vertex_tangents(s);
    const double span = r.times[k + 1] - r.times[k - 1];
    double worst = 0.0;
    for (std::size_t c = 0; c < s.components.size(); ++c) {
      const Polyline& p = s.components[c];
      const std::size_t lo = p.closed ? 0 : 2;
      const std::size_t hi = p.closed ? p.size() : p.size() - 2;
      for (std::size_t i = lo; i < hi; ++i) {
        const Vec2 v = (r.states[k + 1].components[c].vertices[i] -
                        r.states[k - 1].components[c].vertices[i]) / span;
        const Vec2 t = tan.values[c][i];
        const Vec2 x = p.vertices[i];
        const Vec2 target = h.values[c][i] + 0.5 * (x - x.dot(t) * t);
        const Vec2 vn = v - v.dot(t) * t;
        worst = std::max(worst, (vn - target).norm());
      }
    }
    out[k] = worst;
  }
  return out;
}

DiscreteCurve redistribute(const DiscreteCurve& c) {
  DiscreteCurve out = c;
  for (std::size_t k = 0; k < c.components.size(); ++k) {
    const Polyline& p = c.components[k];
    const std::size_t n = p.size();
    const std::size_t e = p.edge_count();
    std::vector<double> s(e + 1, 0.0);
    for (std::size_t i = 0; i < e; ++i) s[i + 1] = s[i] + p.edge_length(i);
    const double total = s[e];
    const std::size_t targets = p.closed ? n : n - 1;
    std::size_t seg = 0;
    for (std::size_t j = 1; j < (p.closed ? n : n - 1); ++j) {
      const double sj = total * static_cast<double>(j) / static_cast<double>(targets);
      while (seg + 1 < e && s[seg + 1] < sj) ++seg;
      const double a = (sj - s[seg]) / (s[seg + 1] - s[seg]);
      out.components[k].vertices[j] =
          (1.0 - a) * p.vertices[seg] + a * p.vertices[(seg + 1) % n];
    }
  }
  return out;
}

namespace {

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& q) {
  return std::min(a.x(), b.x()) <= q.x() && q.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= q.y() && q.y() <= std::max(a.y(), b.y());
}

// Closed segments [a, b] and [c, d] share a point.
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return (d1 == 0 && on_segment(a, b, c)) || (d2 == 0 && on_segment(a, b, d)) ||
         (d3 == 0 && on_segment(c, d, a)) || (d4 == 0 && on_segment(c, d, b));
}

double point_segment_distance(const Vec2& q, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double l2 = d.squaredNorm();
  double s = l2 > 0 ? (q - a).dot(d) / l2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (q - (a + s * d)).norm();
}

}  // namespace

bool has_self_intersection(const DiscreteCurve& c) {
  struct Seg {
    Vec2 a, b;
    std::size_t comp, idx;
  };
  std::vector<Seg> segs;
  for (std::size_t k = 0; k < c.components.size(); ++k) {
    const Polyline& p = c.components[k];
    for (std::size_t i = 0; i < p.edge_count(); ++i)
      segs.push_back({p.vertices[i], p.vertices[(i + 1) % p.size()], k, i});
  }
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      if (segs[i].comp == segs[j].comp) {
        const Polyline& p = c.components[segs[i].comp];
        const std::size_t e = p.edge_count();
        const std::size_t gap = segs[j].idx - segs[i].idx;
        if (gap == 1 || (p.closed && gap == e - 1)) continue;
      }
      if (segments_cross(segs[i].a, segs[i].b, segs[j].a, segs[j].b)) return true;
    }
  return false;
}

std::optional<double> first_self_intersection(const FlowTrajectory& traj) {
  for (std::size_t k = 0; k < traj.size(); ++k)
    if (has_self_intersection(traj.states[k])) return traj.times[k];
  return std::nullopt;
}

double hausdorff_to_lines(const DiscreteCurve& c, const std::vector<AffineLine>& lines, double radius,
                          double sample_step) {
  double d = 0.0;
  auto dist_to_lines = [&](const Vec2& q) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& l : lines) m = std::min(m, std::abs(cross(l.direction, q - l.point)));
    return m;
  };
  for (const auto& p : c.components)
    for (const auto& v : p.vertices)
      if (v.norm() <= radius) d = std::max(d, dist_to_lines(v));
  for (const auto& l : lines) {
    const double s0 = -l.point.dot(l.direction);
    const double foot2 = (l.point + s0 * l.direction).squaredNorm();
    if (foot2 > radius * radius) continue;
    const double half = std::sqrt(radius * radius - foot2);
    const auto m = static_cast<long>(std::ceil(2.0 * half / sample_step));
    for (long i = 0; i <= m; ++i) {
      const Vec2 q = l.at(s0 - half + 2.0 * half * static_cast<double>(i) / static_cast<double>(m));
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : c.components)
        for (std::size_t e = 0; e < p.edge_count(); ++e)
          best = std::min(best, point_segment_distance(q, p.vertices[e], p.vertices[(e + 1) % p.size()]));
      d = std::max(d, best);
    }
  }
  return d;
}

ProductLagrangian ProductTrajectory::state(std::size_t k) const {
  auto pick = [k](const FactorTrack& f) -> Factor {
    if (const auto* t = std::get_if<FlowTrajectory>(&f)) return t->states.at(k);
    return std::get<AffineLine>(f);
  };
  return {pick(first), pick(second)};
}

ProductTrajectory product_evolve(const FactorTrack& a, const FactorTrack& b,
                                 const std::vector<double>& times) {
  ProductTrajectory out{times, a, b};
  const auto* ta = std::get_if<FlowTrajectory>(&a);
  const auto* tb = std::get_if<FlowTrajectory>(&b);
  if (ta && tb) {
    if (ta->times.size() != tb->times.size())
      throw Error(ErrorCode::TimeGridMismatch, "factor trajectories have different lengths");
    for (std::size_t k = 0; k < ta->times.size(); ++k)
      if (std::abs(ta->times[k] - tb->times[k]) > 1e-12 * (1.0 + std::abs(ta->times[k])))
        throw Error(ErrorCode::TimeGridMismatch, "factor time grids differ at index " + std::to_string(k));
    if (ta->mode != tb->mode) throw Error(ErrorCode::TimeGridMismatch, "factor time modes differ");
  }
  if (ta) out.times = ta->times;
  else if (tb) out.times = tb->times;
  return out;
}

ProductTrajectory parabolic_rescale(const ProductTrajectory& traj, double lambda) {
  auto scale = [lambda](const FactorTrack& f) -> FactorTrack {
    if (const auto* t = std::get_if<FlowTrajectory>(&f)) return parabolic_rescale(*t, lambda);
    AffineLine l = std::get<AffineLine>(f);
    l.point *= lambda;
    return l;
  };
  ProductTrajectory out{traj.times, scale(traj.first), scale(traj.second)};
  for (auto& t : out.times) t *= lambda * lambda;
  return out;
}

}  // namespace lmcf
