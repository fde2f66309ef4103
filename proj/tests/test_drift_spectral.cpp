#include "lmcf/drift_spectral.hpp"

#include <doctest.h>

#include <random>

using namespace lmcf;

namespace {

Polynomial x1(int n = 1) { return Polynomial::variable(n, 0); }

std::vector<PairSolution> solutions(const HomogeneousBasis& b) {
  std::vector<PairSolution> v;
  for (const auto& e : b.elements) v.push_back(e.u);
  return v;
}

const PairSolution& find(const HomogeneousBasis& b, const std::string& label) {
  for (const auto& e : b.elements)
    if (e.label == label) return e.u;
  throw std::runtime_error("missing " + label);
}

}  // namespace

TEST_CASE("drift Laplacian on constants, coordinates and x^2 - 2") {
  CHECK(drift_apply(Polynomial::constant(2, 1.0)).is_zero());
  for (int n : {1, 2, 3})
    for (int i = 0; i < n; ++i) CHECK(drift_apply(Polynomial::variable(n, i)) == Polynomial::variable(n, i) * -0.5);
  // (x^2 - 2)'' - x/2 (x^2 - 2)' = 2 - x^2
  const Polynomial f = x1() * x1() - Polynomial::constant(1, 2.0);
  CHECK(drift_apply(f) == f * -1.0);
}

TEST_CASE("scaled Hermite elements have integer coefficients") {
  CHECK(hermite({2}) == x1() * x1() - Polynomial::constant(1, 2.0));
  CHECK(hermite({3}) == x1() * x1() * x1() - x1() * 6.0);
  CHECK(hermite({4}) == x1() * x1() * x1() * x1() - x1() * x1() * 12.0 + Polynomial::constant(1, 12.0));
  CHECK(multi_indices(2, 3).size() == 4);
  CHECK(multi_indices(3, 2).size() == 6);
}

TEST_CASE("Hermite eigen-identity: symbolic exact, grid path below 1e-8") {
  for (int n : {1, 2})
    for (int d = 0; d <= 6; ++d)
      for (const auto& k : multi_indices(n, d)) {
        const Polynomial h = hermite(k);
        CHECK(drift_apply(h) + h * (d / 2.0) == Polynomial(n));
      }
  for (int n : {1, 2})
    for (int d = 0; d <= 4; ++d)
      for (const auto& k : multi_indices(n, d)) {
        const GridFunction g = sample_grid(hermite(k), 12.5, 0.1);
        const GridFunction l0 = drift_apply_grid(g, 12.1);
        CHECK(grid_eigen_residual(g, l0, d / 2.0) < 1e-8);
      }
  const GridFunction g = sample_grid(hermite({2}), 5.0, 0.1);
  CHECK_THROWS_AS(drift_apply_grid(g, 4.9), Error);
  try {
    drift_apply_grid(g, 4.9);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BoundaryTooTight);
  }
  CHECK_NOTHROW(drift_apply_grid(g, 4.7));
}

TEST_CASE("Gauss-Hermite: Gaussian integral and moments") {
  for (int n : {1, 2, 3})
    CHECK(weighted_inner(Polynomial::constant(n, 1.0), Polynomial::constant(n, 1.0)) ==
          doctest::Approx(std::pow(4.0 * pi, n / 2.0)).epsilon(1e-12));
  // int x^2 e^{-x^2/4} = 4 sqrt(pi), int x^4 e^{-x^2/4} = 24 sqrt(pi)
  CHECK(weighted_inner(x1(), x1()) == doctest::Approx(4.0 * std::sqrt(pi)).epsilon(1e-12));
  CHECK(weighted_inner(x1() * x1(), x1() * x1()) == doctest::Approx(24.0 * std::sqrt(pi)).epsilon(1e-12));
  CHECK(hermite_norm_squared({1}) == doctest::Approx(4.0 * std::sqrt(pi)));
  CHECK(hermite_norm_squared({0, 0}) == doctest::Approx(4.0 * pi));
}

TEST_CASE("Hermite Gram matrix is diagonal with the closed-form norms") {
  for (int n : {1, 2}) {
    std::vector<std::vector<int>> ks;
    for (int d = 0; d <= 4; ++d)
      for (const auto& k : multi_indices(n, d)) ks.push_back(k);
    for (std::size_t i = 0; i < ks.size(); ++i)
      for (std::size_t j = 0; j < ks.size(); ++j) {
        const double g = weighted_inner(hermite(ks[i]), hermite(ks[j]));
        const double scale = std::sqrt(hermite_norm_squared(ks[i]) * hermite_norm_squared(ks[j]));
        if (i == j) CHECK(g == doctest::Approx(hermite_norm_squared(ks[i])).epsilon(1e-10));
        else CHECK(std::abs(g) < 1e-10 * scale);
      }
  }
}

TEST_CASE("weighted norm of homogeneous solutions follows e^{d/2} per unit tau") {
  for (int d = 0; d <= 4; ++d) {
    const DriftSolution u = DriftSolution::homogeneous(hermite({d, 0}) + hermite({0, d}), d / 2.0);
    CHECK(drift_heat_residual(u) == 0.0);
    for (double tau : {-3.0, 0.0, 2.0}) {
      const double ratio = weighted_norm(u, tau - 1.0) / weighted_norm(u, tau);
      CHECK(std::abs(ratio / std::exp(d / 2.0) - 1.0) < 1e-10);
    }
    // same solution split into two terms goes through the quadrature path
    DriftSolution split = u;
    split.terms = {{hermite({d, 0}), d / 2.0}, {hermite({0, d}), d / 2.0}};
    CHECK(std::abs(weighted_norm(split, -2.0) / weighted_norm(u, -2.0) - 1.0) < 1e-10);
  }
  PairSolution p;
  p.u[0] = DriftSolution::homogeneous(hermite({1, 0}), 0.5);
  p.u[1] = DriftSolution::homogeneous(hermite({2, 0}), 1.0);
  const double a = weighted_norm(p.u[0], 0.3), b = weighted_norm(p.u[1], 0.3);
  CHECK(weighted_norm(p, 0.3) == doctest::Approx(std::sqrt(a * a + b * b)).epsilon(1e-14));

  DriftSolution bad = DriftSolution::homogeneous(hermite({3}), 1.5);
  bad.growth_degree = 2;
  try {
    weighted_norm(bad, 0.0);
    FAIL("expected GrowthUnbounded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GrowthUnbounded);
  }
}

TEST_CASE("homogeneous pair solutions on an m = 1 pair") {
  const PlanePairConfig cfg = make_plane_pair(2, pi / 4, -pi / 4, 1);
  const HomogeneousBasis b0 = homogeneous_basis(cfg, 0);
  CHECK(b0.elements.size() == 2);
  CHECK(b0.rank == 2);
  const HomogeneousBasis b1 = homogeneous_basis(cfg, 1);
  CHECK(b1.rank == 4);
  const PairSolution& zt = find(b1, "ztheta");
  const PairSolution& z = find(b1, "z");
  for (int j = 0; j < 2; ++j)
    CHECK(zt.u[j].terms[0].h == z.u[j].terms[0].h * cfg.planes[j].angle);
  CHECK(std::abs(weighted_inner(zt, z, 0.0)) < 1e-10);
  CHECK(std::abs(weighted_inner(zt, z, -1.7)) < 1e-10);
  for (const auto& e : b1.elements) {
    CHECK(drift_heat_residual(e.u.u[0]) < 1e-15);
    CHECK(drift_heat_residual(e.u.u[1]) < 1e-15);
  }

  // asymmetric angles: z theta is not orthogonal to z
  const HomogeneousBasis asym = homogeneous_basis(make_plane_pair(2, 0.9, -0.2, 1), 1);
  CHECK(std::abs(weighted_inner(find(asym, "ztheta"), find(asym, "z"), 0.0)) > 1e-3);

  for (int n : {2, 3}) CHECK(homogeneous_basis(make_plane_pair(n, 0.6, -0.6, 1), 1).rank == 2 * n);
  CHECK(homogeneous_basis(make_plane_pair(2, pi / 2, -pi / 2, 0), 1).rank == 4);

  try {
    homogeneous_basis(make_plane_pair(2, 0.3, 0.3, 1), 1);
    FAIL("expected EqualAngles");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EqualAngles);
  }
}

TEST_CASE("single plane: degree-d space is spanned by Hermite elements") {
  for (int n : {1, 2, 3}) {
    const HomogeneousBasis b = homogeneous_basis_single_plane(n, 1);
    CHECK(b.rank == n);
    for (const auto& e : b.elements) CHECK(e.u.u[0].terms[0].h.degree() == 1);
  }
  CHECK(homogeneous_basis_single_plane(2, 2).rank == 3);
}

TEST_CASE("projection removes V and is idempotent") {
  const PlanePairConfig cfg = make_plane_pair(2, pi / 4, -pi / 4, 1);
  const HomogeneousBasis b0 = homogeneous_basis(cfg, 0), b1 = homogeneous_basis(cfg, 1);
  std::vector<PairSolution> V = solutions(b0);
  for (const auto& e : b1.elements)
    if (e.label != "ztheta") V.push_back(e.u);

  // element of span V
  PairSolution inside = V[0];
  for (int j = 0; j < 2; ++j) {
    inside.u[j].terms.push_back({V[3].u[j].terms.empty() ? Polynomial(2) : V[3].u[j].terms[0].h * 2.0, 0.5});
    inside.u[j].growth_degree = 1;
    inside.u[j].normalize();
  }
  const double tau = -0.5;
  const Projection p0 = project_out(inside, V, tau);
  CHECK(weighted_norm(p0.result, tau) < 1e-10 * weighted_norm(inside, tau));

  const PairSolution& zt = find(b1, "ztheta");
  const Projection p1 = project_out(zt, V, tau);
  for (double c : p1.coefficients) CHECK(std::abs(c) < 1e-12);

  // z + 0.3 z theta
  const PairSolution& z = find(b1, "z");
  PairSolution u;
  for (int j = 0; j < 2; ++j) {
    u.u[j] = z.u[j];
    u.u[j].terms[0].h = z.u[j].terms[0].h + zt.u[j].terms[0].h * 0.3;
  }
  const Projection p2 = project_out(u, V, tau);
  CHECK(std::abs(p2.coefficients.back() - 1.0) < 1e-8);
  PairSolution expect = zt;
  for (int j = 0; j < 2; ++j) expect.u[j].terms[0].h = zt.u[j].terms[0].h * 0.3;
  PairSolution diff = p2.result;
  for (int j = 0; j < 2; ++j) {
    diff.u[j].terms.push_back({expect.u[j].terms[0].h * -1.0, 0.5});
    diff.u[j].normalize();
  }
  CHECK(weighted_norm(diff, tau) < 1e-10);

  // idempotence on random inputs
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    PairSolution r;
    for (int j = 0; j < 2; ++j) {
      r.u[j].n = 2;
      for (int d = 0; d <= 2; ++d)
        for (const auto& k : multi_indices(2, d)) r.u[j].terms.push_back({hermite(k) * g(rng), d / 2.0});
      r.u[j].growth_degree = 2;
      r.u[j].normalize();
    }
    const Projection once = project_out(r, V, tau);
    const Projection twice = project_out(once.result, V, tau);
    PairSolution d = twice.result;
    for (int j = 0; j < 2; ++j) {
      for (const auto& t : once.result.u[j].terms) d.u[j].terms.push_back({t.h * -1.0, t.lambda});
      d.u[j].normalize();
    }
    CHECK(weighted_norm(d, tau) < 1e-10 * weighted_norm(once.result, tau));
    for (std::size_t i = 0; i < V.size(); ++i) CHECK(std::abs(weighted_inner(once.result, V[i], tau)) < 1e-9);
  }

  std::vector<PairSolution> dup = V;
  dup.push_back(V[0]);
  try {
    project_out(u, dup, tau);
    FAIL("expected IllConditionedGram");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditionedGram);
  }
}

TEST_CASE("three-annulus classifier on homogeneous sequences") {
  std::vector<double> taus;
  for (int t = -12; t <= 0; ++t) taus.push_back(t);
  for (int d = 0; d <= 4; ++d) {
    const DriftSolution u = DriftSolution::homogeneous(hermite({d}), d / 2.0);
    const NormSequence seq = norm_sequence(u, taus);
    for (double s = 0.05; s < 5.0; s += 0.1) {
      const AnnulusReport r = three_annulus_classify(seq, s);
      CHECK(r.verdict == (s < d ? AnnulusVerdict::Growing : AnnulusVerdict::Decaying));
      for (char gr : r.growth) CHECK(static_cast<bool>(gr) == (s < d));
    }
  }
  CHECK_THROWS_AS(three_annulus_classify(NormSequence{{0, 1, 2}, {0, 0, 0}}, 1.0), Error);
}

TEST_CASE("three-annulus: two-term mixture and non-convex data") {
  // u = h_0 + e^{-tau/2} h_1: |u|^2 = c0 + e^{-tau} c1, degree 1 dominates as tau -> -inf
  DriftSolution u;
  u.n = 1;
  u.terms = {{hermite({0}), 0.0}, {hermite({1}), 0.5}};
  std::vector<double> taus;
  for (int t = -15; t <= 5; ++t) taus.push_back(t);
  const NormSequence seq = norm_sequence(u, taus);
  const double c0 = hermite_norm_squared({0}), c1 = hermite_norm_squared({1});
  for (std::size_t i = 0; i < taus.size(); ++i)
    CHECK(seq.log_norm[i] == doctest::Approx(0.5 * std::log(c0 + std::exp(-taus[i]) * c1)).epsilon(1e-12));
  const AnnulusReport r = three_annulus_classify(seq, 0.5);
  CHECK(r.verdict == AnnulusVerdict::Growing);
  CHECK(r.violations.empty());
  CHECK(r.earliest_consistent_T <= 5.0);
  CHECK(r.growth.back());

  // a bump: growth at T = 2 but not at T = 3
  const NormSequence bump{{-4, -3, -2, -1, 0}, {0.0, 0.1, 0.0, -1.0, -2.0}};
  CHECK(three_annulus_classify(bump, 0.5).verdict == AnnulusVerdict::Violation);
}

TEST_CASE("frequency audit: homogeneous, mixed and constant") {
  std::vector<double> taus;
  for (int t = -6; t <= 6; ++t) taus.push_back(0.5 * t);
  for (int d = 0; d <= 4; ++d)
    for (const auto& k : multi_indices(2, d)) {
      const FrequencyReport f = frequency_audit(norm_sequence(DriftSolution::homogeneous(hermite(k), d / 2.0), taus));
      CHECK(f.homogeneous);
      CHECK(std::abs(f.degree - d) < 1e-8);
    }
  DriftSolution mix;
  mix.n = 1;
  mix.terms = {{hermite({0}) * 2.0, 0.0}, {hermite({2}), 1.0}};
  const FrequencyReport m = frequency_audit(norm_sequence(mix, taus));
  CHECK(!m.homogeneous);
  for (double d2 : m.second_differences) CHECK(d2 > 0.0);
  const FrequencyReport c = frequency_audit(NormSequence{{0, 1, 2, 3}, {1.5, 1.5, 1.5, 1.5}});
  CHECK(c.homogeneous);
  CHECK(c.degree == 0.0);
}

TEST_CASE("property: log-convex mixtures never violate the dichotomy") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> deg(0, 4), count(1, 4);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), sdist(0.05, 4.95);
  std::vector<double> taus;
  for (int t = -10; t <= 3; ++t) taus.push_back(t);
  for (int trial = 0; trial < 100; ++trial) {
    DriftSolution u;
    u.n = 2;
    const int terms = count(rng);
    for (int i = 0; i < terms; ++i) {
      const int d = deg(rng);
      const auto ks = multi_indices(2, d);
      const auto& k = ks[std::uniform_int_distribution<std::size_t>(0, ks.size() - 1)(rng)];
      u.terms.push_back({hermite(k) * coef(rng), d / 2.0});
    }
    u.normalize();
    if (u.terms.empty()) continue;
    const NormSequence seq = norm_sequence(u, taus);
    CHECK(frequency_audit(seq).convex);
    double s = sdist(rng);
    if (s == std::round(s)) s += 0.01;
    CHECK(three_annulus_classify(seq, s).verdict != AnnulusVerdict::Violation);
  }
}
