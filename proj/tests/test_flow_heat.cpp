#include "lmcf/error.hpp"
#include "lmcf/flow_heat.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace lmcf;
using namespace lmcf::test;

namespace {

std::vector<double> time_grid(double t0, double t1, int steps) {
  std::vector<double> t;
  for (int k = 0; k <= steps; ++k) t.push_back(t0 + (t1 - t0) * k / steps);
  return t;
}

FlowTrajectory circle_trajectory(int n, double t0, double t1, int steps) {
  return sample_trajectory([=](double t) { return circle(std::sqrt(-2.0 * t), n); }, time_grid(t0, t1, steps));
}

// Grim Reaper translated rigidly: each vertex keeps its arclength parameter.
FlowTrajectory grim_reaper_trajectory(double s_max, int n, double t0, double t1, int steps) {
  return sample_trajectory([=](double t) { return grim_reaper(s_max, n, t); }, time_grid(t0, t1, steps));
}

double sup_interior_difference(const DiscreteCurve& c, const ScalarField& f, const std::function<double(Vec2)>& g) {
  double e = 0.0;
  for (std::size_t k = 0; k < c.components.size(); ++k) {
    const Polyline& p = c.components[k];
    const std::size_t lo = p.closed ? 0 : 2, hi = p.closed ? p.size() : p.size() - 2;
    for (std::size_t i = lo; i < hi; ++i) e = std::max(e, std::abs(f.values[k][i] - g(p.vertices[i])));
  }
  return e;
}

// Two lines through the origin at angles a0, a1, each with a normal bump sigma exp(-s^2).
DiscreteCurve bumped_pair(double a0, double a1, double sigma, double half_length, int n) {
  DiscreteCurve c;
  for (double a : {a0, a1}) {
    Polyline p;
    const Vec2 d(std::cos(a), std::sin(a)), nrm(-std::sin(a), std::cos(a));
    for (int i = 0; i < n; ++i) {
      const double s = -half_length + 2.0 * half_length * i / (n - 1);
      p.vertices.push_back(s * d + sigma * std::exp(-s * s) * nrm);
    }
    c.components.push_back(p);
  }
  return c;
}

std::vector<AffineLine> limit_lines(double a0, double a1) { return {line_through_origin(a0), line_through_origin(a1)}; }

}  // namespace

TEST_CASE("constant field stays constant with zero residual") {
  const FlowTrajectory tr = circle_trajectory(64, -1.0, -0.5, 20);
  const CaloricField f = solve_heat_on_flow(tr, make_field(tr.states[0], "one", 1.0));
  for (const auto& v : f.values)
    for (double x : v.values[0]) CHECK(std::abs(x - 1.0) < 1e-13);
  CHECK(f.residual.max_sup < 1e-10);
  CHECK(heat_residual(tr, constant_fields(tr, 1.0)).max_sup == 0.0);
  const FlowTrajectory gr = grim_reaper_trajectory(3.0, 61, 0.0, 0.2, 20);
  CHECK(heat_residual(gr, constant_fields(gr, 1.0)).max_sup == 0.0);
}

TEST_CASE("coordinates are caloric on the shrinking circle: O(h^2) + O(dt)") {
  std::vector<double> err, res;
  for (int n : {32, 64, 128}) {
    const double h = 2.0 * pi / n;
    const int steps = static_cast<int>(std::ceil(0.5 / (h * h)));
    const FlowTrajectory tr = circle_trajectory(n, -1.0, -0.5, steps);
    const CaloricField f = solve_heat_on_flow(tr, coordinate_field(tr.states[0], Vec2(1.0, 0.0)));
    err.push_back(sup_interior_difference(tr.states.back(), f.values.back(), [](Vec2 p) { return p.x(); }));
    res.push_back(heat_residual(tr, coordinate_fields(tr, Vec2(1.0, 0.0))).max_sup);
    CHECK(f.growth_ok);
  }
  const RefinementVerdict ve = richardson_verdict(err), vr = richardson_verdict(res);
  CHECK(ve.pass);
  CHECK(vr.pass);
  CHECK(err.back() < 1e-3);
}

TEST_CASE("coordinates are caloric on the translating Grim Reaper (tangential slide corrected)") {
  std::vector<double> err, res;
  for (int n : {81, 161, 321}) {
    const double s_max = 4.0, h = 2.0 * s_max / (n - 1);
    const int steps = static_cast<int>(std::ceil(0.25 / (h * h)));
    const FlowTrajectory tr = grim_reaper_trajectory(s_max, n, 0.0, 0.25, steps);
    const Vec2 dir = Vec2(1.0, 2.0).normalized();
    const auto exact = HeatBoundary::callback([dir](std::size_t, int, double, const Vec2& p) { return p.dot(dir); });
    const CaloricField f = solve_heat_on_flow(tr, coordinate_field(tr.states[0], dir), exact);
    err.push_back(sup_interior_difference(tr.states.back(), f.values.back(), [dir](Vec2 p) { return p.dot(dir); }));
    res.push_back(heat_residual(tr, coordinate_fields(tr, dir)).max_sup);
  }
  CHECK(richardson_verdict(err).pass);
  CHECK(richardson_verdict(res).pass);
}

TEST_CASE("coordinates on a semi-implicit flow of a random closed curve converge") {
  std::mt19937_64 rng(11);
  const std::vector<double> coeff = random_fourier(rng, 3);
  std::vector<double> res;
  for (int n : {128, 256, 512}) {
    const DiscreteCurve c{{fourier_curve(coeff, n)}};
    const double h = c.mean_edge();
    const FlowTrajectory tr = evolve(c, 0.0, 0.05, 0.5 * h * h);
    res.push_back(heat_residual(tr, coordinate_fields(tr, Vec2(0.6, 0.8))).max_sup);
  }
  CHECK(richardson_verdict(res).pass);
}

TEST_CASE("angle on the shrinking circle is material-constant") {
  const int n = 128;
  const FlowTrajectory tr = circle_trajectory(n, -1.0, -0.2, 80);
  const ScalarField th0 = lagrangian_angle(tr.states[0]);
  CHECK(th0.seam_jump[0] == doctest::Approx(2.0 * pi));
  const CaloricField f = solve_heat_on_flow(tr, th0);
  double err = 0.0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::abs(f.values.back().values[0][i] - (2.0 * pi * i / n + pi / 2)));
  CHECK(err < 1e-6);
  CHECK(f.residual.max_sup < 1e-6);
}

TEST_CASE("beta + 2t theta: static line vanishes, Grim Reaper converges") {
  const DiscreteCurve l = line(0.4, 3.0, 31, Vec2(0.3, -0.2));
  const FlowTrajectory st = static_trajectory(l, time_grid(0.0, 0.5, 10));
  CHECK(beta_caloric_check(st).residual.max_sup < 1e-12);

  std::vector<double> res;
  for (int n : {81, 161, 321}) {
    const double h = 6.0 / (n - 1);
    const int steps = static_cast<int>(std::ceil(0.25 / (h * h)));
    const FlowTrajectory tr = grim_reaper_trajectory(3.0, n, -0.5, -0.25, steps);
    res.push_back(beta_caloric_check(tr).residual.max_sup);
  }
  CHECK(richardson_verdict(res).pass);

  // the field without the 2t theta term is not caloric
  const FlowTrajectory tr = grim_reaper_trajectory(3.0, 161, -0.5, -0.25, 100);
  const BetaCaloricReport r = beta_caloric_check(tr);
  std::vector<ScalarField> beta_only = r.beta;
  CHECK(heat_residual(tr, beta_only, true).max_sup > 100.0 * r.residual.max_sup);
}

TEST_CASE("beta + 2t theta on the product Grim Reaper x R") {
  std::vector<double> res;
  for (int n : {81, 161, 321}) {
    const double h = 6.0 / (n - 1);
    const int steps = static_cast<int>(std::ceil(0.25 / (h * h)));
    const FlowTrajectory tr = grim_reaper_trajectory(3.0, n, -0.5, -0.25, steps);
    const ProductTrajectory pt = product_evolve(tr, line_through_origin(0.0));
    res.push_back(beta_caloric_check(pt).max_sup);
  }
  CHECK(richardson_verdict(res).pass);
}

TEST_CASE("B field identity and B = cos beta at s1") {
  const DiscreteCurve l = line(0.7, 3.0, 31);
  const FlowTrajectory st = static_trajectory(l, time_grid(-1.0, -0.25, 15));
  const BFieldReport bs = evolve_B(st, -0.5);
  CHECK(bs.residual.max_sup < 1e-12);
  CHECK(bs.defect_at_s1 < 1e-14);

  std::vector<double> res, res_p;
  for (int n : {81, 161, 321}) {
    const double h = 6.0 / (n - 1);
    const int steps = 4 * static_cast<int>(std::ceil(0.125 / (h * h)));
    const FlowTrajectory tr = grim_reaper_trajectory(3.0, n, -1.0, -0.5, steps);
    const BFieldReport b = evolve_B(tr, -0.75);
    CHECK(b.defect_at_s1 < 1e-12);
    res.push_back(b.residual.max_sup);
    const BFieldReport bp = evolve_B(product_evolve(tr, line_through_origin(0.0)), -0.75);
    CHECK(bp.defect_at_s1 < 1e-12);
    res_p.push_back(bp.residual.max_sup);
  }
  CHECK(richardson_verdict(res).pass);
  CHECK(richardson_verdict(res_p).pass);
  CHECK_THROWS_AS(evolve_B(st, -0.33), Error);
}

TEST_CASE("uniqueness: bitwise reruns and O(dt) agreement under dt halving") {
  const int n = 64;
  auto run = [&](int steps) {
    const FlowTrajectory tr = circle_trajectory(n, -1.0, -0.5, steps);
    ScalarField f0 = make_field(tr.states[0], "f0");
    for (int i = 0; i < n; ++i) f0.values[0][i] = std::cos(3.0 * 2.0 * pi * i / n) + 0.5;
    return solve_heat_on_flow(tr, f0).values.back().values[0];
  };
  const auto a = run(50), b = run(50);
  CHECK(a == b);
  const auto c = run(100), d = run(200);
  double d1 = 0.0, d2 = 0.0;
  for (int i = 0; i < n; ++i) {
    d1 = std::max(d1, std::abs(a[i] - c[i]));
    d2 = std::max(d2, std::abs(c[i] - d[i]));
  }
  CHECK(d2 > 0.0);
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("maximum principle on closed curves (property, seeded)") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteCurve c{{fourier_curve(random_fourier(rng, 4), 96)}};
    const double h = c.mean_edge();
    const FlowTrajectory tr = evolve(c, 0.0, 0.05, 0.5 * h * h);
    ScalarField f0 = make_field(c, "noise");
    for (double& x : f0.values[0]) x = u(rng);
    const CaloricField f = solve_heat_on_flow(tr, f0);
    for (std::size_t k = 1; k < f.values.size(); ++k)
      CHECK(f.values[k].max_abs() <= f.values[k - 1].max_abs() + 1e-12);
    CHECK(f.growth_ok);
  }
}

TEST_CASE("growth guard and trajectory requirements") {
  const FlowTrajectory tr = circle_trajectory(32, -1.0, -0.5, 4);
  ScalarField f0 = make_field(tr.states[0], "huge", 1e9);
  CHECK_THROWS_AS(solve_heat_on_flow(tr, f0), Error);
  try {
    solve_heat_on_flow(tr, f0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GrowthUnbounded);
  }
  FlowTrajectory bad = tr;
  bad.states[2] = circle(1.0, 40);
  CHECK_THROWS_AS(solve_heat_on_flow(bad, make_field(tr.states[0], "one", 1.0)), Error);
}

TEST_CASE("approximate height on the static line pair is exact") {
  const double a0 = pi / 6, a1 = -pi / 3;
  DiscreteCurve pair = line(a0, 4.0, 81);
  pair.components.push_back(line(a1, 4.0, 81).components[0]);
  const FlowTrajectory st = static_trajectory(pair, time_grid(-1.0, -0.25, 15));
  HeightSetup setup;
  setup.limit = limit_lines(a0, a1);
  for (auto mode : {HeightSetup::ZMode::CurveCoordinate, HeightSetup::ZMode::LineFactor}) {
    setup.mode = mode;
    const HeightReport r = approx_height_solution(st, -0.5, setup);
    CHECK(r.sup_difference < 1e-6);
    REQUIRE(r.components.size() == 2);
    CHECK(r.components[0].b_bar == doctest::Approx(std::cos(-2.0 * 0.5 * a0)).epsilon(1e-12));
    CHECK(r.components[1].b_bar == doctest::Approx(std::cos(-2.0 * 0.5 * a1)).epsilon(1e-12));
  }
}

TEST_CASE("approximate height on smoothed pairs improves as the smoothing scale shrinks") {
  const double a0 = pi / 4, a1 = -pi / 4;
  HeightSetup setup;
  setup.limit = limit_lines(a0, a1);
  setup.mode = HeightSetup::ZMode::LineFactor;
  std::vector<double> sup;
  for (double sigma : {0.2, 0.1, 0.05}) {
    const DiscreteCurve c = bumped_pair(a0, a1, sigma, 5.0, 201);
    const double h = c.mean_edge();
    const FlowTrajectory tr = evolve(c, -1.0, -0.25, 0.5 * h * h);
    std::vector<double> candidates;
    for (std::size_t k = 0; k < tr.size(); ++k)
      if (tr.times[k] > -0.5 && tr.times[k] < 0.0 && k % 20 == 0) candidates.push_back(tr.times[k]);
    sup.push_back(select_s1_and_height(tr, candidates, setup).sup_difference);
  }
  CHECK(sup[1] < sup[0]);
  CHECK(sup[2] < sup[1]);
}

TEST_CASE("component ambiguity propagates from extraction") {
  const DiscreteCurve c = line(0.0, 4.0, 41);
  const FlowTrajectory st = static_trajectory(c, time_grid(-1.0, -0.5, 5));
  HeightSetup setup;
  setup.limit = limit_lines(0.0, pi / 2);
  try {
    approx_height_solution(st, -0.5, setup);
    FAIL("expected ComponentAmbiguity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ComponentAmbiguity);
  }
}

TEST_CASE("richardson verdict") {
  CHECK(richardson_verdict({1e-2, 2.5e-3, 6.25e-4}).pass);
  CHECK_FALSE(richardson_verdict({1e-2, 5e-3, 2.5e-3}).pass);
  CHECK(richardson_verdict({1e-2, 1e-11, 1e-11}).pass);
  CHECK_FALSE(richardson_verdict({1e-2}).pass);
}
