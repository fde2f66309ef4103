#include "lmcf/flow_heat.hpp"

#include "lmcf/diagnostics.hpp"
#include "lmcf/error.hpp"
#include "lmcf/linking.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmcf {

namespace {

constexpr std::size_t kCollar = 2;

bool interior(const Polyline& p, std::size_t i) {
  return p.closed || (i >= kCollar && i + kCollar < p.size());
}

double seam(const ScalarField& f, std::size_t c) { return c < f.seam_jump.size() ? f.seam_jump[c] : 0.0; }

// Neighbour values of vertex i with the seam jump applied; NaN where an open end has no neighbour.
std::pair<double, double> neighbours(const Polyline& p, const std::vector<double>& v, double jump, std::size_t i) {
  const std::size_t n = p.size();
  double prev = std::numeric_limits<double>::quiet_NaN(), next = prev;
  if (i > 0) prev = v[i - 1];
  else if (p.closed) prev = v[n - 1] - jump;
  if (i + 1 < n) next = v[i + 1];
  else if (p.closed) next = v[0] + jump;
  return {prev, next};
}

// Mass-lumped P1 Laplacian at vertex i (NaN at open ends).
double vertex_laplacian(const Polyline& p, const std::vector<double>& v, double jump, std::size_t i) {
  const std::size_t n = p.size();
  if (!p.closed && (i == 0 || i + 1 == n)) return std::numeric_limits<double>::quiet_NaN();
  const auto [prev, next] = neighbours(p, v, jump, i);
  const double lp = p.edge_length((i + n - 1) % n), ln = p.edge_length(i);
  return 2.0 / (lp + ln) * ((next - v[i]) / ln - (v[i] - prev) / lp);
}

// Centered arclength derivative in the direction of increasing index (one-sided at open ends).
double vertex_derivative(const Polyline& p, const std::vector<double>& v, double jump, std::size_t i) {
  const std::size_t n = p.size();
  const auto [prev, next] = neighbours(p, v, jump, i);
  if (std::isnan(prev)) return (next - v[i]) / p.edge_length(i);
  if (std::isnan(next)) return (v[i] - prev) / p.edge_length(i - 1);
  return (next - prev) / (p.edge_length((i + n - 1) % n) + p.edge_length(i));
}

// Tangential speed of each vertex between two states of the same component, measured along the
// unit tangent of the later state.
std::vector<double> slide_speed(const Polyline& a, const Polyline& b, const std::vector<Vec2>& tangent, double dt) {
  std::vector<double> s(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) s[i] = (b.vertices[i] - a.vertices[i]).dot(tangent[i]) / dt;
  return s;
}

void require_material(const FlowTrajectory& traj) {
  if (traj.size() < 2) throw Error(ErrorCode::InvalidArgument, "trajectory needs at least two states");
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (k < traj.remeshed.size() && traj.remeshed[k] && k > 0)
      throw Error(ErrorCode::InvalidArgument, "heat equations need material vertex identity (remeshed state)");
    if (k > 0 && traj.states[k].components.size() != traj.states[0].components.size())
      throw Error(ErrorCode::InvalidArgument, "component count changes along the trajectory");
    for (std::size_t c = 0; k > 0 && c < traj.states[0].components.size(); ++c)
      if (traj.states[k].components[c].size() != traj.states[0].components[c].size())
        throw Error(ErrorCode::InvalidArgument, "vertex count changes along the trajectory");
  }
}

// Pointwise step residual (f_new - f_old)/dt - slide d_s f_new - Delta f_new on component c of the
// later state; NaN outside the interior.
std::vector<double> step_residual(const Polyline& a, const Polyline& b, const std::vector<Vec2>& tangent, double dt,
                                  const std::vector<double>& f_old, const std::vector<double>& f_new,
                                  double jump_new) {
  const std::vector<double> speed = slide_speed(a, b, tangent, dt);
  std::vector<double> r(b.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!interior(b, i)) continue;
    r[i] = (f_new[i] - f_old[i]) / dt - speed[i] * vertex_derivative(b, f_new, jump_new, i) -
           vertex_laplacian(b, f_new, jump_new, i);
  }
  return r;
}

struct StepStats {
  double sup = 0.0;
  double l2 = 0.0;
};

struct ResidualDetail {
  ResidualReport report;
  std::vector<std::vector<double>> means;  // [step][component] weighted mean residual
};

ResidualDetail residual_detail(const FlowTrajectory& traj, const std::vector<ScalarField>& f, bool gauge,
                               const std::vector<ScalarField>* source) {
  require_material(traj);
  if (f.size() != traj.size()) throw Error(ErrorCode::InvalidArgument, "one field per state required");
  ResidualDetail d;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const DiscreteCurve& a = traj.states[k];
    const DiscreteCurve& b = traj.states[k + 1];
    const double dt = traj.times[k + 1] - traj.times[k];
    const VectorField tangents = vertex_tangents(b);
    const auto dual = dual_lengths(b);
    double sup = 0.0, l2 = 0.0;
    std::vector<double> means;
    for (std::size_t c = 0; c < b.components.size(); ++c) {
      std::vector<double> r = step_residual(a.components[c], b.components[c], tangents.values[c], dt, f[k].values[c],
                                            f[k + 1].values[c], seam(f[k + 1], c));
      if (source)
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= (*source)[k + 1].values[c][i];
      double wsum = 0.0, mean = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i)
        if (!std::isnan(r[i])) {
          wsum += dual[c][i];
          mean += dual[c][i] * r[i];
        }
      mean = wsum > 0.0 ? mean / wsum : 0.0;
      means.push_back(mean);
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (std::isnan(r[i])) continue;
        const double v = gauge ? r[i] - mean : r[i];
        sup = std::max(sup, std::abs(v));
        l2 += dual[c][i] * v * v;
      }
    }
    d.report.times.push_back(traj.times[k + 1]);
    d.report.sup.push_back(sup);
    d.report.l2.push_back(std::sqrt(l2));
    d.report.max_sup = std::max(d.report.max_sup, sup);
    d.means.push_back(means);
  }
  return d;
}

// One implicit heat step on component c: (M + dt K - dt M S D) u = M u_old - dt j, where S is the
// slide speed, D the centered derivative and j the seam term of the stiffness.
std::vector<double> heat_step(const Polyline& b, const std::vector<double>& u_old, double jump,
                              const std::vector<double>& speed, double dt, const std::vector<char>& fixed,
                              const std::vector<double>& u_fixed) {
  const std::size_t n = b.size();
  std::vector<Eigen::Triplet<double>> trip;
  VecX rhs(n);
  bool symmetric = true;
  std::vector<double> mass(n, 0.0);
  for (std::size_t e = 0; e < b.edge_count(); ++e) {
    mass[e] += 0.5 * b.edge_length(e);
    mass[(e + 1) % n] += 0.5 * b.edge_length(e);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (fixed[i]) {
      trip.emplace_back(ii, ii, 1.0);
      rhs[ii] = u_fixed[i];
      continue;
    }
    rhs[ii] = mass[i] * u_old[i];
    trip.emplace_back(ii, ii, mass[i]);
  }
  for (std::size_t e = 0; e < b.edge_count(); ++e) {
    const std::size_t i = e, j = (e + 1) % n;
    const double k = dt / b.edge_length(e);
    const double jmp = (b.closed && e + 1 == n) ? jump : 0.0;  // u_j + jmp continues u across the seam
    for (const auto& [r, other, sign] : {std::tuple{i, j, 1.0}, std::tuple{j, i, -1.0}}) {
      if (fixed[r]) continue;
      const auto rr = static_cast<Eigen::Index>(r);
      trip.emplace_back(rr, rr, k);
      if (fixed[other]) rhs[rr] += k * u_fixed[other];
      else trip.emplace_back(rr, static_cast<Eigen::Index>(other), -k);
      rhs[rr] += sign * k * jmp;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i] || speed[i] == 0.0) continue;
    const bool has_prev = b.closed || i > 0, has_next = b.closed || i + 1 < n;
    if (!has_prev || !has_next) continue;
    symmetric = false;
    const std::size_t p = (i + n - 1) % n, q = (i + 1) % n;
    const double c = dt * mass[i] * speed[i] / (b.edge_length(p) + b.edge_length(i));
    const auto ii = static_cast<Eigen::Index>(i);
    double shift = 0.0;
    if (b.closed && i + 1 == n) shift += jump;
    if (b.closed && i == 0) shift += jump;
    if (fixed[q]) rhs[ii] += c * u_fixed[q];
    else trip.emplace_back(ii, static_cast<Eigen::Index>(q), -c);
    if (fixed[p]) rhs[ii] -= c * u_fixed[p];
    else trip.emplace_back(ii, static_cast<Eigen::Index>(p), c);
    rhs[ii] += c * shift;
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(trip.begin(), trip.end());
  VecX sol;
  if (symmetric) {
    // Fixed rows are identity rows with their couplings moved to the right-hand side.
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "heat system is not SPD");
    sol = solver.solve(rhs);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(a);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "heat system is singular");
    sol = solver.solve(rhs);
  }
  if (!sol.allFinite()) throw Error(ErrorCode::SolverFailure, "heat solve produced non-finite values");
  return std::vector<double>(sol.data(), sol.data() + n);
}

}  // namespace

ResidualReport heat_residual(const FlowTrajectory& traj, const std::vector<ScalarField>& f, bool constant_gauge,
                             const std::vector<ScalarField>* source) {
  return residual_detail(traj, f, constant_gauge, source).report;
}

CaloricField solve_heat_on_flow(const FlowTrajectory& traj, const ScalarField& f0, const HeatBoundary& boundary) {
  require_material(traj);
  const DiscreteCurve& s0 = traj.states[0];
  if (f0.values.size() != s0.components.size())
    throw Error(ErrorCode::InvalidArgument, "initial field does not match the first state");
  CaloricField out;
  out.growth_degree = f0.growth_degree;
  const double c0 = polynomial_growth_constant(s0, f0, f0.growth_degree);
  if (!(c0 <= 1e6)) throw Error(ErrorCode::GrowthUnbounded, "initial field exceeds its declared growth");
  out.times = traj.times;
  out.values.push_back(f0);
  out.growth_constant.push_back(c0);
  const double d = f0.growth_degree;
  const double c1 = d * (d + 2.0);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const DiscreteCurve& a = traj.states[k];
    const DiscreteCurve& b = traj.states[k + 1];
    const double dt = traj.times[k + 1] - traj.times[k];
    const double t1 = traj.times[k + 1];
    const VectorField tangents = vertex_tangents(b);
    ScalarField next = out.values.back();
    for (std::size_t c = 0; c < b.components.size(); ++c) {
      const Polyline& pb = b.components[c];
      const std::size_t n = pb.size();
      std::vector<char> fixed(n, 0);
      std::vector<double> ufix(n, 0.0);
      if (!pb.closed) {
        for (int end = 0; end < 2; ++end) {
          const std::size_t i = end == 0 ? 0 : n - 1;
          fixed[i] = 1;
          ufix[i] = boundary.kind == HeatBoundary::Kind::Callback ? boundary.value(c, end, t1, pb.vertices[i])
                                                                  : f0.values[c][i];
        }
      }
      const std::vector<double> speed = slide_speed(a.components[c], pb, tangents.values[c], dt);
      next.values[c] = heat_step(pb, out.values.back().values[c], seam(f0, c), speed, dt, fixed, ufix);
    }
    out.values.push_back(next);
    const double ck = polynomial_growth_constant(b, next, f0.growth_degree);
    out.growth_constant.push_back(ck);
    if (ck > std::max(c0, 1e-300) * std::exp(c1 * (t1 - traj.times[0])) * (1.0 + 1e-9) + 1e-12) out.growth_ok = false;
  }
  out.residual = heat_residual(traj, out.values);
  return out;
}

ScalarField coordinate_field(const DiscreteCurve& c, const Vec2& direction) {
  ScalarField f = make_field(c, "coordinate");
  f.growth_degree = 1;
  for (std::size_t k = 0; k < c.components.size(); ++k)
    for (std::size_t i = 0; i < c.components[k].size(); ++i) f.values[k][i] = c.components[k].vertices[i].dot(direction);
  return f;
}

std::vector<ScalarField> coordinate_fields(const FlowTrajectory& traj, const Vec2& direction) {
  std::vector<ScalarField> out;
  for (const auto& s : traj.states) out.push_back(coordinate_field(s, direction));
  return out;
}

std::vector<ScalarField> constant_fields(const FlowTrajectory& traj, double value) {
  std::vector<ScalarField> out;
  for (const auto& s : traj.states) out.push_back(make_field(s, "constant", value));
  return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

ScalarField anchored_beta(const DiscreteCurve& c) {
  ExactnessOptions o;
  for (const auto& p : c.components) o.anchors.push_back(std::make_pair(nearest_origin_vertex(p), 0.0));
  return exactness_primitive(c, o);
}

ScalarField combine(const ScalarField& beta, const ScalarField& theta, double coef, const std::string& name) {
  ScalarField g = beta;
  g.name = name;
  g.seam_jump.assign(beta.values.size(), 0.0);
  for (std::size_t c = 0; c < g.values.size(); ++c) {
    for (std::size_t i = 0; i < g.values[c].size(); ++i) g.values[c][i] += coef * theta.values[c][i];
    g.seam_jump[c] = seam(beta, c) + coef * seam(theta, c);
  }
  return g;
}

}  // namespace

BetaCaloricReport beta_caloric_check(const FlowTrajectory& traj) {
  require_material(traj);
  BetaCaloricReport r;
  std::vector<ScalarField> g;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    r.beta.push_back(anchored_beta(traj.states[k]));
    r.theta.push_back(lagrangian_angle(traj.states[k]));
    g.push_back(combine(r.beta.back(), r.theta.back(), 2.0 * traj.times[k], "beta+2t*theta"));
  }
  const ResidualDetail d = residual_detail(traj, g, true, nullptr);
  r.residual = d.report;
  const std::size_t nc = traj.states[0].components.size();
  r.gauge.push_back(std::vector<double>(nc, 0.0));
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    std::vector<double> c = r.gauge.back();
    for (std::size_t j = 0; j < nc; ++j) c[j] -= dt * d.means[k][j];
    r.gauge.push_back(c);
  }
  for (std::size_t k = 0; k < traj.size(); ++k)
    for (std::size_t j = 0; j < nc; ++j)
      for (double& v : r.beta[k].values[j]) v += r.gauge[k][j];
  return r;
}

namespace {

struct ProductView {
  const FlowTrajectory* curve = nullptr;
  AffineLine line;
  std::vector<double> s;  // line samples
  double ds = 0.0;
};

ProductView product_view(const ProductTrajectory& traj, int samples) {
  ProductView v;
  const FactorTrack* curve = nullptr;
  const FactorTrack* line = nullptr;
  for (const FactorTrack* f : {&traj.first, &traj.second}) {
    if (std::holds_alternative<FlowTrajectory>(*f)) curve = f;
    else line = f;
  }
  if (!curve || !line) throw Error(ErrorCode::InvalidArgument, "product checks need one curve factor and one line");
  if (samples < 2 * static_cast<int>(kCollar) + 1) throw Error(ErrorCode::InvalidArgument, "too few line samples");
  v.curve = &std::get<FlowTrajectory>(*curve);
  v.line = std::get<AffineLine>(*line);
  v.ds = 2.0 / (samples - 1);
  for (int j = 0; j < samples; ++j) v.s.push_back(-1.0 + v.ds * j);
  return v;
}

// Product-grid residual: curve part per column plus the line second difference, minus a source.
// Returns per-step sup/l2 and per-step per-component weighted means.
ResidualDetail product_residual(const ProductView& v, const std::vector<std::vector<MatX>>& field,
                                const std::vector<std::vector<MatX>>* source, bool gauge) {
  const FlowTrajectory& tr = *v.curve;
  require_material(tr);
  ResidualDetail d;
  const std::size_t m = v.s.size();
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const DiscreteCurve& a = tr.states[k];
    const DiscreteCurve& b = tr.states[k + 1];
    const double dt = tr.times[k + 1] - tr.times[k];
    const VectorField tangents = vertex_tangents(b);
    const auto dual = dual_lengths(b);
    double sup = 0.0, l2 = 0.0;
    std::vector<double> means;
    for (std::size_t c = 0; c < b.components.size(); ++c) {
      const MatX& fo = field[k][c];
      const MatX& fn = field[k + 1][c];
      MatX r = MatX::Constant(fn.rows(), fn.cols(), std::numeric_limits<double>::quiet_NaN());
      for (std::size_t j = kCollar; j + kCollar < m; ++j) {
        std::vector<double> col_o(fo.rows()), col_n(fn.rows());
        for (Eigen::Index i = 0; i < fn.rows(); ++i) {
          col_o[i] = fo(i, j);
          col_n[i] = fn(i, j);
        }
        const std::vector<double> rc = step_residual(a.components[c], b.components[c], tangents.values[c], dt, col_o,
                                                     col_n, 0.0);
        for (Eigen::Index i = 0; i < fn.rows(); ++i) {
          if (std::isnan(rc[i])) continue;
          const double lap2 = (fn(i, j + 1) - 2.0 * fn(i, j) + fn(i, j - 1)) / (v.ds * v.ds);
          r(i, j) = rc[i] - lap2 - (source ? (*source)[k + 1][c](i, j) : 0.0);
        }
      }
      double wsum = 0.0, mean = 0.0;
      for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j)
          if (!std::isnan(r(i, j))) {
            wsum += dual[c][i];
            mean += dual[c][i] * r(i, j);
          }
      mean = wsum > 0.0 ? mean / wsum : 0.0;
      means.push_back(mean);
      for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
          if (std::isnan(r(i, j))) continue;
          const double val = gauge ? r(i, j) - mean : r(i, j);
          sup = std::max(sup, std::abs(val));
          l2 += dual[c][i] * v.ds * val * val;
        }
    }
    d.report.times.push_back(tr.times[k + 1]);
    d.report.sup.push_back(sup);
    d.report.l2.push_back(std::sqrt(l2));
    d.report.max_sup = std::max(d.report.max_sup, sup);
    d.means.push_back(means);
  }
  return d;
}

// beta_1 + beta_2 + coef(t) (theta_1 + theta_2) on the product grid, curve beta anchored per state.
std::vector<std::vector<MatX>> product_fields(const ProductView& v, const std::vector<ScalarField>& beta,
                                              const std::vector<ScalarField>& theta,
                                              const std::function<double(std::size_t)>& coef) {
  std::vector<std::vector<MatX>> out;
  const double theta2 = v.line.angle();
  for (std::size_t k = 0; k < v.curve->size(); ++k) {
    std::vector<MatX> comps;
    for (std::size_t c = 0; c < beta[k].values.size(); ++c) {
      const std::size_t n = beta[k].values[c].size();
      MatX f(n, v.s.size());
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < v.s.size(); ++j)
          f(i, j) = beta[k].values[c][i] + v.line.beta(v.s[j]) + coef(k) * (theta[k].values[c][i] + theta2);
      comps.push_back(f);
    }
    out.push_back(comps);
  }
  return out;
}

}  // namespace

ResidualReport beta_caloric_check(const ProductTrajectory& traj, int line_samples) {
  const ProductView v = product_view(traj, line_samples);
  std::vector<ScalarField> beta, theta;
  for (const auto& s : v.curve->states) {
    beta.push_back(anchored_beta(s));
    theta.push_back(lagrangian_angle(s));
  }
  const auto fields = product_fields(v, beta, theta, [&](std::size_t k) { return 2.0 * v.curve->times[k]; });
  return product_residual(v, fields, nullptr, true).report;
}

namespace {

std::size_t time_index(const std::vector<double>& times, double t) {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return k;
  throw Error(ErrorCode::InvalidArgument, "time " + std::to_string(t) + " is not a recorded time");
}

// |x^perp + 2 (s1 - t) H|^2 on a curve state.
ScalarField b_source_weight(const DiscreteCurve& c, double s1, double t) {
  const VectorField h = mean_curvature(c);
  ScalarField w = make_field(c, "weight");
  for (std::size_t k = 0; k < c.components.size(); ++k)
    for (std::size_t i = 0; i < c.components[k].size(); ++i)
      w.values[k][i] = (normal_projection(c, k, i) + 2.0 * (s1 - t) * h.values[k][i]).squaredNorm();
  return w;
}

}  // namespace

BFieldReport evolve_B(const FlowTrajectory& traj, double s1) {
  BFieldReport r;
  r.s1_index = time_index(traj.times, s1);
  const BetaCaloricReport beta = beta_caloric_check(traj);
  std::vector<ScalarField> source;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    ScalarField b = combine(beta.beta[k], beta.theta[k], 2.0 * (t - s1), "B");
    for (auto& comp : b.values)
      for (double& x : comp) x = std::cos(x);
    b.seam_jump.assign(b.values.size(), 0.0);
    ScalarField src = b_source_weight(traj.states[k], s1, t);
    for (std::size_t c = 0; c < src.values.size(); ++c)
      for (std::size_t i = 0; i < src.values[c].size(); ++i) src.values[c][i] *= b.values[c][i];
    r.B.push_back(b);
    source.push_back(src);
  }
  r.residual = heat_residual(traj, r.B, false, &source);
  const std::size_t k = r.s1_index;
  for (std::size_t c = 0; c < r.B[k].values.size(); ++c)
    for (std::size_t i = 0; i < r.B[k].values[c].size(); ++i)
      r.defect_at_s1 = std::max(r.defect_at_s1, std::abs(r.B[k].values[c][i] - std::cos(beta.beta[k].values[c][i])));
  return r;
}

BFieldReport evolve_B(const ProductTrajectory& traj, double s1, int line_samples) {
  const ProductView v = product_view(traj, line_samples);
  BFieldReport r;
  r.s1_index = time_index(v.curve->times, s1);
  std::vector<ScalarField> beta, theta;
  for (const auto& s : v.curve->states) {
    beta.push_back(anchored_beta(s));
    theta.push_back(lagrangian_angle(s));
  }
  // caloric gauge of the product field
  const auto g = product_fields(v, beta, theta, [&](std::size_t k) { return 2.0 * v.curve->times[k]; });
  const ResidualDetail gd = product_residual(v, g, nullptr, true);
  std::vector<std::vector<double>> gauge(1, std::vector<double>(beta[0].values.size(), 0.0));
  for (std::size_t k = 0; k + 1 < v.curve->size(); ++k) {
    std::vector<double> c = gauge.back();
    for (std::size_t j = 0; j < c.size(); ++j) c[j] -= (v.curve->times[k + 1] - v.curve->times[k]) * gd.means[k][j];
    gauge.push_back(c);
  }
  for (std::size_t k = 0; k < beta.size(); ++k)
    for (std::size_t c = 0; c < beta[k].values.size(); ++c)
      for (double& x : beta[k].values[c]) x += gauge[k][c];

  auto fields = product_fields(v, beta, theta, [&](std::size_t k) { return 2.0 * (v.curve->times[k] - s1); });
  std::vector<std::vector<MatX>> source = fields;
  const Vec2 d = v.line.direction;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const DiscreteCurve& st = v.curve->states[k];
    const ScalarField w1 = b_source_weight(st, s1, v.curve->times[k]);
    for (std::size_t c = 0; c < fields[k].size(); ++c)
      for (Eigen::Index i = 0; i < fields[k][c].rows(); ++i)
        for (Eigen::Index j = 0; j < fields[k][c].cols(); ++j) {
          const Vec2 q = v.line.at(v.s[j]);
          const double q_perp = (q - q.dot(d) * d).squaredNorm();
          const double b = std::cos(fields[k][c](i, j));
          fields[k][c](i, j) = b;
          source[k][c](i, j) = (w1.values[c][i] + q_perp) * b;
        }
  }
  r.residual = product_residual(v, fields, &source, false).report;
  const std::size_t k = r.s1_index;
  for (std::size_t c = 0; c < fields[k].size(); ++c)
    for (Eigen::Index i = 0; i < fields[k][c].rows(); ++i)
      for (Eigen::Index j = 0; j < fields[k][c].cols(); ++j) {
        const double beta_full = beta[k].values[c][i] + v.line.beta(v.s[j]);
        r.defect_at_s1 = std::max(r.defect_at_s1, std::abs(fields[k][c](i, j) - std::cos(beta_full)));
      }
  // product B fields are reported through the curve row of the central line sample
  for (std::size_t kk = 0; kk < fields.size(); ++kk) {
    ScalarField bf = make_field(v.curve->states[kk], "B");
    for (std::size_t c = 0; c < fields[kk].size(); ++c)
      for (Eigen::Index i = 0; i < fields[kk][c].rows(); ++i) bf.values[c][i] = fields[kk][c](i, v.s.size() / 2);
    r.B.push_back(bf);
  }
  return r;
}

// ---------------------------------------------------------------------------------------------

namespace {

FlowTrajectory slice(const FlowTrajectory& traj, std::size_t first, std::size_t last) {
  FlowTrajectory out;
  out.mode = traj.mode;
  out.meta = traj.meta;
  for (std::size_t k = first; k <= last; ++k) {
    out.times.push_back(traj.times[k]);
    out.states.push_back(traj.states[k]);
    out.remeshed.push_back(k < traj.remeshed.size() ? traj.remeshed[k] : 0);
  }
  return out;
}

double nearest_branch(double value, double reference) {
  return value + 2.0 * pi * std::round((reference - value) / (2.0 * pi));
}

}  // namespace

HeightReport approx_height_solution(const FlowTrajectory& traj, double s1, const HeightSetup& setup) {
  require_material(traj);
  if (std::abs(traj.times[0] + 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "trajectory must start at t = -1");
  if (!(s1 > -1.0)) throw Error(ErrorCode::InvalidArgument, "s1 must be later than -1");
  if (setup.limit.size() != 2) throw Error(ErrorCode::InvalidArgument, "two limit lines required");
  const std::size_t k1 = time_index(traj.times, s1);
  const DiscreteCurve& start = traj.states[0];
  const DiscreteCurve& end = traj.states[k1];
  const CurveExtraction ex =
      extract_curve_components(end, setup.limit, setup.inner_radius, setup.outer_radius, setup.delta);
  // labels at t = -1 are read geometrically: vertex identity need not follow the normal motion
  const CurveExtraction ex0 =
      extract_curve_components(start, setup.limit, setup.inner_radius, setup.outer_radius, setup.delta);

  const ScalarField beta = anchored_beta(start);
  const ScalarField theta = lagrangian_angle(start);
  ScalarField h0 = make_field(start, "height");
  h0.growth_degree = setup.mode == HeightSetup::ZMode::CurveCoordinate ? 1 : 0;
  for (std::size_t c = 0; c < start.components.size(); ++c)
    for (std::size_t i = 0; i < start.components[c].size(); ++i) {
      const double b = std::cos(beta.values[c][i] - 2.0 * (1.0 + s1) * theta.values[c][i]);
      const double z = setup.mode == HeightSetup::ZMode::CurveCoordinate
                           ? start.components[c].vertices[i].dot(setup.e_z)
                           : 1.0;
      h0.values[c][i] = b * z;
    }
  const CaloricField h = solve_heat_on_flow(slice(traj, 0, k1), h0);
  const ScalarField& hs = h.values.back();

  HeightReport rep;
  rep.s1 = s1;
  rep.separation = ex.separation;
  const double r2 = setup.inner_radius * setup.inner_radius;
  for (const CurveComponent& comp : ex.labeled) {
    HeightComponent hc;
    hc.label = comp.label;
    const std::size_t c = comp.component;
    const auto dual = dual_lengths(start);
    double wsum = 0.0, bsum = 0.0, tsum = 0.0;
    for (const CurveComponent& c0 : ex0.labeled) {
      if (c0.label != comp.label) continue;
      const Polyline& p0 = start.components[c0.component];
      for (std::size_t i : c0.vertices()) {
        if (p0.vertices[i].squaredNorm() >= r2) continue;
        const double w = dual[c0.component][i];
        wsum += w;
        bsum += w * beta.values[c0.component][i];
        tsum += w * theta.values[c0.component][i];
      }
    }
    const std::vector<std::size_t> idx = comp.vertices();
    if (!(wsum > 0.0)) throw Error(ErrorCode::ComponentAmbiguity, "labeled component has no mass inside B_inner at t = -1");
    hc.beta_bar = bsum / wsum;
    hc.theta_bar = nearest_branch(setup.limit[comp.label].angle(), tsum / wsum);
    hc.b_bar = std::cos(hc.beta_bar - 2.0 * (1.0 + s1) * hc.theta_bar);
    const Polyline& p1 = end.components[c];
    for (std::size_t i : idx) {
      const double q = p1.vertices[i].squaredNorm();
      if (q >= r2) continue;
      double diff;
      if (setup.mode == HeightSetup::ZMode::CurveCoordinate)
        diff = std::abs(hc.b_bar * p1.vertices[i].dot(setup.e_z) - hs.values[c][i]);
      else
        diff = std::sqrt(r2 - q) * std::abs(hc.b_bar - hs.values[c][i]);
      hc.sup_difference = std::max(hc.sup_difference, diff);
    }
    rep.sup_difference = std::max(rep.sup_difference, hc.sup_difference);
    rep.components.push_back(hc);
  }
  return rep;
}

HeightReport select_s1_and_height(const FlowTrajectory& traj, const std::vector<double>& candidates,
                                  const HeightSetup& setup) {
  double best_sep = -1.0, best_s1 = 0.0;
  for (double s1 : candidates) {
    try {
      const std::size_t k = time_index(traj.times, s1);
      const CurveExtraction ex = extract_curve_components(traj.states[k], setup.limit, setup.inner_radius,
                                                          setup.outer_radius, setup.delta);
      if (ex.separation > best_sep) {
        best_sep = ex.separation;
        best_s1 = s1;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ComponentAmbiguity) throw;
    }
  }
  if (best_sep < 0.0) throw Error(ErrorCode::ComponentAmbiguity, "no candidate s1 gives two separated components");
  return approx_height_solution(traj, best_s1, setup);
}

RefinementVerdict richardson_verdict(const std::vector<double>& residuals, double min_slope, double floor) {
  RefinementVerdict v;
  v.pass = residuals.size() >= 2;
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    const double s = std::log2(residuals[i - 1] / residuals[i]);
    v.slopes.push_back(s);
    if (!(residuals[i] < floor || s >= min_slope)) v.pass = false;
  }
  return v;
}

}  // namespace lmcf
