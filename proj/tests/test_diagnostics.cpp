#include "lmcf/diagnostics.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace lmcf;
using namespace lmcf::test;

namespace {

GaussianWindow window2(Vec2 x0, double t0) {
  GaussianWindow w;
  w.x0 = x0;
  w.t0 = t0;
  return w;
}

// Gaussian integral over the exact circle |x - c| = r, periodic trapezoid rule (spectral).
double circle_oracle(double r, const Vec2& a, double s) {
  const int m = 20000;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double phi = 2.0 * pi * i / m;
    const Vec2 x = r * Vec2(std::cos(phi), std::sin(phi));
    acc += std::exp(-(x - a).squaredNorm() / (4.0 * s));
  }
  return acc * 2.0 * pi * r / m / std::sqrt(4.0 * pi * s);
}

FlowTrajectory exact_circle(double t_begin, double t_end, int samples, int n) {
  std::vector<double> times;
  for (int k = 0; k < samples; ++k) times.push_back(t_begin + (t_end - t_begin) * k / (samples - 1));
  return sample_trajectory([=](double t) { return circle(std::sqrt(1.0 - 2.0 * t), n); }, times);
}

}  // namespace

TEST_CASE("truncation radius solves rho = 1e-16 peak") {
  for (double s : {0.01, 1.0, 7.0}) {
    const double r = truncation_radius(s);
    CHECK(std::exp(-r * r / (4.0 * s)) == doctest::Approx(1e-16).epsilon(1e-10));
  }
}

TEST_CASE("density of a line through the center is one, off-center lines follow exp(-d^2/4s)") {
  const DiscreteCurve l = line(0.37, 40.0, 81);
  for (double s : {0.05, 1.0, 10.0}) {
    CHECK(std::abs(gaussian_density_ratio(l, -s, window2(Vec2::Zero(), 0.0)) - 1.0) < 1e-10);
    const Vec2 off = 0.8 * Vec2(-std::sin(0.37), std::cos(0.37));
    CHECK(gaussian_density_ratio(l, 0.0, window2(off, s)) ==
          doctest::Approx(std::exp(-0.64 / (4.0 * s))).epsilon(1e-10));
  }
  CHECK_THROWS_AS(gaussian_density_ratio(l, 0.0, window2(Vec2::Zero(), 0.0)), Error);
}

TEST_CASE("transverse plane pair in C^2 has density two at the vertex") {
  std::vector<ProductLagrangian> pair;
  for (double a : {pi / 4, -pi / 4}) pair.push_back({line(a, 30.0, 7), line(a, 30.0, 7)});
  GaussianWindow w;
  w.x0 = VecX::Zero(4);
  w.t0 = 0.0;
  for (double t : {-0.1, -1.0, -5.0}) CHECK(std::abs(gaussian_density_ratio(pair, t, w) - 2.0) < 1e-10);
  // analytic line factors give the same
  std::vector<ProductLagrangian> lines;
  for (double a : {pi / 4, -pi / 4}) lines.push_back({line_through_origin(a), line_through_origin(a)});
  CHECK(std::abs(gaussian_density_ratio(lines, -1.0, w) - 2.0) < 1e-10);
}

TEST_CASE("polygonal circle density matches the exact-circle oracle") {
  const DiscreteCurve c = circle(1.0, 2048);
  for (const Vec2& a : {Vec2(0, 0), Vec2(0.3, -0.2), Vec2(1.0, 0.0)})
    for (double s : {0.1, 0.5, 2.0})
      CHECK(std::abs(gaussian_density_ratio(c, 0.0, window2(a, s)) - circle_oracle(1.0, a, s)) < 5e-6);
}

TEST_CASE("circle density at its extinction point is constant sqrt(2 pi / e)") {
  const FlowTrajectory tr = exact_circle(0.0, 0.45, 10, 2048);
  const MonotonicityReport r = monotonicity_audit(tr, window2(Vec2::Zero(), 0.5));
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    CHECK(std::abs(r.values[k] - std::sqrt(2.0 * pi / std::exp(1.0))) < 1e-5);
    CHECK(r.dissipation[k] < 1e-4);
  }
  CHECK(r.pass);
}

TEST_CASE("entropy of line, circle and line pair") {
  CHECK(std::abs(entropy(line(0.2, 20.0, 401)).value - 1.0) < 1e-4);
  const EntropyResult c = entropy(circle(1.3, 512));
  CHECK(std::abs(c.value - std::sqrt(2.0 * pi / std::exp(1.0))) < 1e-3);
  CHECK(c.center.norm() < 1e-2);
  CHECK(c.scale == doctest::Approx(1.3 * 1.3 / 2.0).epsilon(1e-2));
  DiscreteCurve pair = line(0.5, 20.0, 401);
  pair.components.push_back(line(-0.7, 20.0, 401).components[0]);
  CHECK(std::abs(entropy(pair).value - 2.0) < 1e-3);
}

TEST_CASE("density and entropy are invariant under parabolic rescaling") {
  const DiscreteCurve c{{fourier_curve({0.03, -0.02, 0.01, 0.02}, 256)}};
  const double lambda = 2.5;
  const DiscreteCurve big = scale_curve(c, lambda);
  const Vec2 a(0.2, 0.1);
  for (double s : {0.05, 0.3})
    CHECK(gaussian_density_ratio(big, 0.0, window2(lambda * a, lambda * lambda * s)) ==
          doctest::Approx(gaussian_density_ratio(c, 0.0, window2(a, s))).epsilon(1e-12));
  CHECK(entropy(big).value == doctest::Approx(entropy(c).value).epsilon(1e-8));
}

TEST_CASE("density on the support lies in [1, entropy] at small scales") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const DiscreteCurve c{{fourier_curve(random_fourier(rng, 3), 1024)}};
    const double ent = entropy(c).value;
    for (std::size_t i = 0; i < 1024; i += 97) {
      const double d = gaussian_density_ratio(c, 0.0, window2(c.components[0].vertices[i], 1e-3));
      CHECK(d > 1.0 - 1e-3);
      CHECK(d <= ent + 1e-9);
    }
  }
}

TEST_CASE("Huisken monotonicity on a static line and a shrinking circle") {
  const DiscreteCurve l = line(0.3, 40.0, 201);
  std::vector<double> times;
  for (int k = 0; k < 11; ++k) times.push_back(-1.0 + 0.09 * k);
  const MonotonicityReport st = monotonicity_audit(static_trajectory(l, times), window2(Vec2::Zero(), 0.0));
  CHECK(st.pass);
  for (std::size_t k = 0; k < st.values.size(); ++k) {
    CHECK(std::abs(st.values[k] - 1.0) < 1e-10);
    CHECK(st.dissipation[k] < 1e-20);
  }

  const FlowTrajectory tr = exact_circle(0.0, 0.3, 301, 1024);
  const MonotonicityReport r = monotonicity_audit(tr, window2(Vec2(0.4, 0.0), 0.6));
  CHECK(r.pass);
  for (std::size_t k = 1; k < r.values.size(); ++k) CHECK(r.values[k] < r.values[k - 1]);
  CHECK(r.dissipation_mismatch < 0.02);
}

TEST_CASE("coordinate field on a static line has constant weighted integral") {
  const DiscreteCurve l = line(0.0, 40.0, 401);
  std::vector<double> times{-1.0, -0.7, -0.4, -0.1};
  const FlowTrajectory tr = static_trajectory(l, times);
  std::vector<ScalarField> f;
  for (std::size_t k = 0; k < times.size(); ++k) {
    ScalarField x = make_field(l, "x1");
    x.growth_degree = 1;
    for (std::size_t i = 0; i < l.components[0].size(); ++i) x.values[0][i] = l.components[0].vertices[i].x();
    f.push_back(x);
  }
  const MonotonicityReport r = monotonicity_audit(tr, window2(Vec2(0.7, 0.0), 0.0), &f);
  for (double v : r.values) CHECK(std::abs(v - 0.7) < 1e-8);
  CHECK(r.pass);

  for (auto& x : f) x.growth_degree = 0;
  for (auto& x : f)
    for (auto& v : x.values[0]) v = std::exp(v * v);
  try {
    monotonicity_audit(tr, window2(Vec2::Zero(), 0.0), &f);
    FAIL("expected GrowthUnbounded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GrowthUnbounded);
  }
}

TEST_CASE("translator fit: plane containing e_z, Grim Reaper and circle") {
  // frame: e_z = -e_y so that w = x and the Grim Reaper has w = theta
  const Vec2 ez(0.0, -1.0);
  const auto flat = translator_fit(line(-pi / 2, 3.0, 41), ez);
  CHECK(flat[0].b == 0.0);
  CHECK(!flat[0].degenerate);
  CHECK(flat[0].residual < 1e-12);

  const auto tilted = translator_fit(line(0.3, 3.0, 41), ez);
  CHECK(tilted[0].degenerate);

  double prev = 0.0;
  for (int n : {128, 256, 512}) {
    const double smax = std::asinh(std::tan(pi / 2 - 0.05));
    const auto fit = translator_fit(grim_reaper(smax, n), ez);
    CHECK(std::abs(fit[0].b - 1.0) < 2e-3);
    CHECK(fit[0].kappa_measured == doctest::Approx(-1.0).epsilon(1e-2));
    if (prev > 0.0) CHECK(slope(prev, fit[0].residual) > 1.8);
    prev = fit[0].residual;
  }
  CHECK(prev < 1e-3);

  for (int n : {64, 256, 1024}) {
    const auto fit = translator_fit(circle(0.8, n), ez);
    CHECK(fit[0].residual >= 0.1 * fit[0].rms_w);
  }
}

TEST_CASE("product translator fit with the line factor") {
  CoordinateFrame f;
  f.e_z = Vec4(0, -1, 0, 0);
  f.e_w = apply_j(f.e_z);
  const double smax = std::asinh(std::tan(pi / 2 - 0.05));
  const auto fit = translator_fit(ProductLagrangian{grim_reaper(smax, 512), line_through_origin(0.0)}, f);
  const auto planar = translator_fit(grim_reaper(smax, 512), Vec2(0, -1));
  REQUIRE(fit.size() == 1);
  CHECK(fit[0].b == doctest::Approx(planar[0].b).epsilon(1e-12));
  CHECK(fit[0].residual == doctest::Approx(planar[0].residual).epsilon(1e-9));
  CHECK(fit[0].velocity_residual < 1e-2);
}
