#include "lmcf/drift_spectral.hpp"

#include "lmcf/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace lmcf {

Polynomial drift_apply(const Polynomial& f) {
  const int n = f.nvars();
  Polynomial r(n);
  for (int i = 0; i < n; ++i) {
    const Polynomial di = f.derivative(i);
    r = r + di.derivative(i) - Polynomial::variable(n, i) * di * 0.5;
  }
  return r;
}

namespace {

// g_{k+1} = x g_k - 2k g_{k-1}, g_0 = 1, g_1 = x: g_k(x) = 2^{k/2} He_k(x / sqrt 2).
Polynomial hermite_1d(int n, int axis, int k) {
  const Polynomial x = Polynomial::variable(n, axis);
  Polynomial prev = Polynomial::constant(n, 1.0);
  if (k == 0) return prev;
  Polynomial cur = x;
  for (int j = 1; j < k; ++j) {
    Polynomial next = x * cur - prev * (2.0 * j);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

Polynomial hermite(const std::vector<int>& k) {
  const int n = static_cast<int>(k.size());
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty multi-index");
  Polynomial p = Polynomial::constant(n, 1.0);
  for (int i = 0; i < n; ++i) {
    if (k[i] < 0) throw Error(ErrorCode::InvalidArgument, "negative multi-index entry");
    p = p * hermite_1d(n, i, k[i]);
  }
  return p;
}

std::vector<std::vector<int>> multi_indices(int n, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> k(n, 0);
  auto rec = [&](auto&& self, int axis, int left) -> void {
    if (axis == n - 1) {
      k[axis] = left;
      out.push_back(k);
      return;
    }
    for (int v = left; v >= 0; --v) {
      k[axis] = v;
      self(self, axis + 1, left - v);
    }
  };
  if (n > 0 && degree >= 0) rec(rec, 0, degree);
  return out;
}

// int g_k^2 e^{-x^2/4} dx = 2^k k! * 2 sqrt(pi) per axis.
double hermite_norm_squared(const std::vector<int>& k) {
  double v = 1.0;
  for (int ki : k) v *= std::ldexp(factorial(ki), ki) * 2.0 * std::sqrt(pi);
  return v;
}

// ---------------------------------------------------------------------------------------------

namespace {

constexpr double kFirst[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
constexpr double kSecond[7] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
constexpr int kHalfStencil = 3;

std::vector<int> unflatten(long idx, int n, int points) {
  std::vector<int> c(n);
  for (int i = n - 1; i >= 0; --i) {
    c[i] = static_cast<int>(idx % points);
    idx /= points;
  }
  return c;
}

long stride(int axis, int n, int points) {
  long s = 1;
  for (int i = axis + 1; i < n; ++i) s *= points;
  return s;
}

long total_points(int n, int points) {
  long t = 1;
  for (int i = 0; i < n; ++i) t *= points;
  return t;
}

}  // namespace

GridFunction sample_grid(const Polynomial& f, double half_width, double h) {
  if (!(h > 0.0) || !(half_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing and width must be positive");
  GridFunction g;
  g.n = f.nvars();
  g.h = h;
  const int half = static_cast<int>(std::floor(half_width / h + 1e-9));
  g.points = 2 * half + 1;
  g.half_width = half * h;
  const long total = total_points(g.n, g.points);
  g.values.resize(total);
  VecX x(g.n);
  for (long idx = 0; idx < total; ++idx) {
    const auto c = unflatten(idx, g.n, g.points);
    for (int i = 0; i < g.n; ++i) x[i] = g.coordinate(c[i]);
    g.values[idx] = f.eval(x);
  }
  return g;
}

GridFunction drift_apply_grid(const GridFunction& f, double eval_radius) {
  if (eval_radius + kHalfStencil * f.h > f.half_width + 1e-9 * f.h)
    throw Error(ErrorCode::BoundaryTooTight, "stencil leaves the grid within the evaluation radius");
  GridFunction out = f;
  const long total = total_points(f.n, f.points);
  out.values.setConstant(std::numeric_limits<double>::quiet_NaN());
  const double inv_h = 1.0 / f.h, inv_h2 = inv_h * inv_h;
  for (long idx = 0; idx < total; ++idx) {
    const auto c = unflatten(idx, f.n, f.points);
    bool inside = true;
    for (int i = 0; i < f.n; ++i) inside = inside && std::abs(f.coordinate(c[i])) <= eval_radius + 1e-9 * f.h;
    if (!inside) continue;
    double acc = 0.0;
    for (int i = 0; i < f.n; ++i) {
      const long st = stride(i, f.n, f.points);
      double d1 = 0.0, d2 = 0.0;
      for (int j = 0; j < 7; ++j) {
        const double v = f.values[idx + (j - kHalfStencil) * st];
        d1 += kFirst[j] * v;
        d2 += kSecond[j] * v;
      }
      acc += d2 * inv_h2 - 0.5 * f.coordinate(c[i]) * d1 * inv_h;
    }
    out.values[idx] = acc;
  }
  return out;
}

double grid_eigen_residual(const GridFunction& f, const GridFunction& l0f, double lambda) {
  double num = 0.0, den = 0.0;
  const long total = total_points(f.n, f.points);
  for (long idx = 0; idx < total; ++idx) {
    if (std::isnan(l0f.values[idx])) continue;
    const auto c = unflatten(idx, f.n, f.points);
    double r2 = 0.0;
    for (int i = 0; i < f.n; ++i) r2 += f.coordinate(c[i]) * f.coordinate(c[i]);
    const double w = std::exp(-r2 / 4.0);
    const double res = l0f.values[idx] + lambda * f.values[idx];
    num += res * res * w;
    den += f.values[idx] * f.values[idx] * w;
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------------------------

const GaussHermite& gauss_hermite(int count) {
  static std::map<int, GaussHermite> cache;
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Hermite rule needs at least one node");
  auto it = cache.find(count);
  if (it != cache.end()) return it->second;
  // Jacobi matrix of the physicists' Hermite recurrence (weight e^{-y^2}); x = 2y.
  MatX jac = MatX::Zero(count, count);
  for (int k = 1; k < count; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<MatX> es(jac);
  GaussHermite rule;
  for (int i = 0; i < count; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.nodes.push_back(2.0 * es.eigenvalues()[i]);
    rule.weights.push_back(2.0 * std::sqrt(pi) * v0 * v0);
  }
  return cache.emplace(count, std::move(rule)).first->second;
}

namespace {

template <typename F>
double tensor_quadrature(int n, int nodes, const F& integrand) {
  const GaussHermite& gh = gauss_hermite(nodes);
  const long total = total_points(n, nodes);
  VecX x(n);
  double acc = 0.0;
  for (long idx = 0; idx < total; ++idx) {
    const auto c = unflatten(idx, n, nodes);
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      x[i] = gh.nodes[c[i]];
      w *= gh.weights[c[i]];
    }
    acc += w * integrand(x);
  }
  return acc;
}

}  // namespace

double weighted_inner(const Polynomial& f, const Polynomial& g, int nodes) {
  if (f.nvars() != g.nvars()) throw Error(ErrorCode::InvalidArgument, "arity mismatch");
  if (f.is_zero() || g.is_zero()) return 0.0;
  return tensor_quadrature(f.nvars(), nodes, [&](const VecX& x) { return f.eval(x) * g.eval(x); });
}

double weighted_norm(const Polynomial& f, int nodes) { return std::sqrt(std::max(0.0, weighted_inner(f, f, nodes))); }

DriftSolution DriftSolution::homogeneous(const Polynomial& h, double lambda) {
  DriftSolution u;
  u.n = h.nvars();
  u.terms.push_back({h, lambda});
  u.growth_degree = std::max(0, h.degree());
  return u;
}

Polynomial DriftSolution::at(double tau) const {
  Polynomial p(n);
  for (const auto& t : terms) p = p + t.h * std::exp(-t.lambda * tau);
  return p;
}

void DriftSolution::normalize() {
  std::vector<HomogeneousTerm> merged;
  for (const auto& t : terms) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const HomogeneousTerm& m) { return m.lambda == t.lambda; });
    if (it == merged.end()) merged.push_back(t);
    else it->h = it->h + t.h;
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const HomogeneousTerm& t) { return t.h.is_zero(); }),
               merged.end());
  terms = std::move(merged);
}

namespace {

void check_growth(const DriftSolution& u) {
  for (const auto& t : u.terms)
    if (t.h.degree() > u.growth_degree)
      throw Error(ErrorCode::GrowthUnbounded, "term of degree " + std::to_string(t.h.degree()) +
                                                  " exceeds the declared growth degree " +
                                                  std::to_string(u.growth_degree));
}

}  // namespace

double weighted_norm(const DriftSolution& u, double tau) {
  check_growth(u);
  if (u.terms.empty()) return 0.0;
  if (u.terms.size() == 1) return std::exp(-u.terms[0].lambda * tau) * weighted_norm(u.terms[0].h);
  return weighted_norm(u.at(tau));
}

double drift_heat_residual(const DriftSolution& u) {
  double worst = 0.0;
  for (const auto& t : u.terms) {
    const Polynomial r = drift_apply(t.h) + t.h * t.lambda;
    for (const auto& [m, c] : r.terms()) worst = std::max(worst, std::abs(c));
  }
  return worst;
}

double weighted_inner(const PairSolution& a, const PairSolution& b, double tau) {
  double s = 0.0;
  for (int j = 0; j < 2; ++j) {
    check_growth(a.u[j]);
    check_growth(b.u[j]);
    if (a.u[j].terms.empty() || b.u[j].terms.empty()) continue;
    s += weighted_inner(a.u[j].at(tau), b.u[j].at(tau));
  }
  return s;
}

double weighted_norm(const PairSolution& u, double tau) {
  const double a = weighted_norm(u.u[0], tau), b = weighted_norm(u.u[1], tau);
  return std::sqrt(a * a + b * b);
}

// ---------------------------------------------------------------------------------------------

namespace {

PairSolution pair_from(const PlanePairConfig& cfg, const Polynomial& p1, const Polynomial& p2, double lambda) {
  PairSolution s;
  const Polynomial* p[2] = {&p1, &p2};
  for (int j = 0; j < 2; ++j) {
    s.u[j].n = cfg.n;
    s.u[j].growth_degree = std::max(0, static_cast<int>(2 * lambda + 0.5));
    if (!p[j]->is_zero()) s.u[j].terms.push_back({*p[j], lambda});
  }
  return s;
}

// Restriction of the ambient linear functional a to P_j in intrinsic coordinates.
Polynomial restrict_linear(const PlanePairConfig& cfg, int j, const VecX& a) {
  return Polynomial::linear(cfg.planes[j].basis.transpose() * a);
}

void finish_basis(HomogeneousBasis& b) {
  const std::size_t k = b.elements.size();
  b.gram = MatX::Zero(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j)
      b.gram(i, j) = b.gram(j, i) = weighted_inner(b.elements[i].u, b.elements[j].u, 0.0);
  if (k == 0) return;
  Eigen::JacobiSVD<MatX> svd(b.gram);
  const VecX sv = svd.singularValues();
  b.rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++b.rank;
}

}  // namespace

HomogeneousBasis homogeneous_basis(const PlanePairConfig& cfg, int degree) {
  const double t1 = cfg.planes[0].angle, t2 = cfg.planes[1].angle;
  if (std::abs(t1 - t2) < 1e-12) throw Error(ErrorCode::EqualAngles, "theta_bar_1 == theta_bar_2");
  const int m = cfg.intersection_dim;
  if (m != 0 && m != 1) throw Error(ErrorCode::InvalidArgument, "basis builder supports intersection dimension 0 or 1");
  if (degree != 0 && degree != 1) throw Error(ErrorCode::InvalidArgument, "basis builder supports degree 0 or 1");
  const int n = cfg.n;
  HomogeneousBasis b;
  b.degree = degree;
  if (degree == 0) {
    b.elements.push_back({"1", pair_from(cfg, Polynomial::constant(n, 1.0), Polynomial::constant(n, 1.0), 0.0)});
    b.elements.push_back({"theta", pair_from(cfg, Polynomial::constant(n, t1), Polynomial::constant(n, t2), 0.0)});
  } else if (m == 1) {
    for (std::size_t k = 0; k < cfg.frame.transverse.size(); ++k) {
      const VecX& a = cfg.frame.transverse[k];
      b.elements.push_back({"x" + std::to_string(k + 1),
                            pair_from(cfg, restrict_linear(cfg, 0, a), restrict_linear(cfg, 1, a), 0.5)});
    }
    const Polynomial z1 = restrict_linear(cfg, 0, cfg.frame.e_z), z2 = restrict_linear(cfg, 1, cfg.frame.e_z);
    b.elements.push_back({"z", pair_from(cfg, z1, z2, 0.5)});
    b.elements.push_back({"ztheta", pair_from(cfg, z1 * t1, z2 * t2, 0.5)});
  } else {
    for (int k = 0; k < 2 * n; ++k) {
      const VecX a = VecX::Unit(2 * n, k);
      b.elements.push_back({"X" + std::to_string(k + 1),
                            pair_from(cfg, restrict_linear(cfg, 0, a), restrict_linear(cfg, 1, a), 0.5)});
    }
  }
  finish_basis(b);
  return b;
}

HomogeneousBasis homogeneous_basis_single_plane(int n, int degree) {
  if (n < 1 || degree < 0) throw Error(ErrorCode::InvalidArgument, "need n >= 1 and degree >= 0");
  HomogeneousBasis b;
  b.degree = degree;
  for (const auto& k : multi_indices(n, degree)) {
    std::string label = "h";
    for (int ki : k) label += "_" + std::to_string(ki);
    PairSolution s;
    s.u[0] = DriftSolution::homogeneous(hermite(k), degree / 2.0);
    s.u[1].n = n;
    b.elements.push_back({label, s});
  }
  finish_basis(b);
  return b;
}

Projection project_out(const PairSolution& u, const std::vector<PairSolution>& V, double tau) {
  const std::size_t k = V.size();
  Projection p;
  p.result = u;
  if (k == 0) return p;
  MatX G(k, k);
  VecX rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    rhs[i] = weighted_inner(V[i], u, tau);
    for (std::size_t j = i; j < k; ++j) G(i, j) = G(j, i) = weighted_inner(V[i], V[j], tau);
  }
  Eigen::JacobiSVD<MatX> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX sv = svd.singularValues();
  p.gram_condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  if (!(p.gram_condition < 1e8))
    throw Error(ErrorCode::IllConditionedGram, "Gram condition number " + std::to_string(p.gram_condition));
  const VecX c = svd.solve(rhs);
  p.coefficients.assign(c.data(), c.data() + k);
  for (int j = 0; j < 2; ++j) {
    DriftSolution& r = p.result.u[j];
    for (std::size_t i = 0; i < k; ++i) {
      const DriftSolution& v = V[i].u[j];
      if (r.n == 0) r.n = v.n;
      r.growth_degree = std::max(r.growth_degree, v.growth_degree);
      for (const auto& t : v.terms) r.terms.push_back({t.h * -c[i], t.lambda});
    }
    r.normalize();
  }
  return p;
}

// ---------------------------------------------------------------------------------------------

NormSequence norm_sequence(const DriftSolution& u, const std::vector<double>& taus) {
  NormSequence s;
  for (double t : taus) {
    s.tau.push_back(t);
    s.log_norm.push_back(std::log(weighted_norm(u, t)));
  }
  return s;
}

NormSequence norm_sequence(const PairSolution& u, const std::vector<double>& taus) {
  NormSequence s;
  for (double t : taus) {
    s.tau.push_back(t);
    s.log_norm.push_back(std::log(weighted_norm(u, t)));
  }
  return s;
}

const char* verdict_name(AnnulusVerdict v) {
  switch (v) {
    case AnnulusVerdict::Growing: return "growing";
    case AnnulusVerdict::Decaying: return "decaying";
    case AnnulusVerdict::Violation: return "violation";
  }
  return "?";
}

AnnulusReport three_annulus_classify(const NormSequence& seq, double s) {
  if (s == std::round(s)) throw Error(ErrorCode::InvalidArgument, "s must not be an integer");
  if (seq.tau.size() != seq.log_norm.size() || seq.tau.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least two (tau, log norm) pairs");
  for (std::size_t i = 0; i < seq.tau.size(); ++i) {
    if (seq.tau[i] != std::round(seq.tau[i])) throw Error(ErrorCode::InvalidArgument, "tau must be integers");
    if (i > 0 && seq.tau[i] != seq.tau[i - 1] + 1.0)
      throw Error(ErrorCode::InvalidArgument, "tau must be consecutive and increasing");
  }
  AnnulusReport r;
  r.s = s;
  // Pair (tau - 1, tau) gives T = -tau; iterate tau downward so T increases.
  for (std::size_t i = seq.tau.size() - 1; i >= 1; --i) {
    const double ratio = seq.log_norm[i - 1] - seq.log_norm[i];
    r.T.push_back(-seq.tau[i]);
    r.log_ratio.push_back(ratio);
    r.growth.push_back(ratio >= s / 2.0);
  }
  for (std::size_t i = 0; i + 1 < r.T.size(); ++i)
    if (r.growth[i] && !r.growth[i + 1]) r.violations.push_back(r.T[i]);
  if (!r.violations.empty()) {
    r.verdict = AnnulusVerdict::Violation;
    r.earliest_consistent_T = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const bool grow = r.growth.back();
  r.verdict = grow ? AnnulusVerdict::Growing : AnnulusVerdict::Decaying;
  std::size_t first = r.T.size() - 1;
  while (first > 0 && static_cast<bool>(r.growth[first - 1]) == grow) --first;
  r.earliest_consistent_T = r.T[first];
  return r;
}

FrequencyReport frequency_audit(const NormSequence& seq) {
  const std::size_t m = seq.tau.size();
  if (m < 3 || seq.log_norm.size() != m) throw Error(ErrorCode::InvalidArgument, "need at least three points");
  const double step = seq.tau[1] - seq.tau[0];
  for (std::size_t i = 1; i < m; ++i)
    if (std::abs(seq.tau[i] - seq.tau[i - 1] - step) > 1e-12 * std::max(1.0, std::abs(step)) || !(step > 0.0))
      throw Error(ErrorCode::InvalidArgument, "tau must be uniformly spaced and increasing");
  FrequencyReport r;
  r.homogeneous = true;
  r.convex = true;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double d2 = 2.0 * (seq.log_norm[i + 1] - 2.0 * seq.log_norm[i] + seq.log_norm[i - 1]);
    r.second_differences.push_back(d2);
    if (std::abs(d2) >= 1e-8) r.homogeneous = false;
    if (d2 < -1e-8) r.convex = false;
  }
  r.degree = -2.0 * (seq.log_norm[m - 1] - seq.log_norm[0]) / (seq.tau[m - 1] - seq.tau[0]);
  return r;
}

}  // namespace lmcf
