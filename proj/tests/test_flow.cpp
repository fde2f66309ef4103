#include "lmcf/flow.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace lmcf;
using namespace lmcf::test;

namespace {

double mean_radius(const DiscreteCurve& c) {
  double s = 0.0;
  for (const auto& v : c.components[0].vertices) s += v.norm();
  return s / static_cast<double>(c.components[0].size());
}

// Material point of the Grim Reaper moving with normal speed only.
Vec2 grim_reaper_normal_path(double x0, double t) {
  const double x = std::atan(std::tan(x0) * std::exp(-t));
  return {x, -std::log(std::cos(x)) + t};
}

FlowBoundary grim_reaper_ends(const DiscreteCurve& g) {
  const Vec2 a = g.components[0].vertices.front();
  const Vec2 b = g.components[0].vertices.back();
  FlowBoundary bd;
  bd.ends.push_back({EndCondition::prescribed([x0 = a.x()](double t) { return grim_reaper_normal_path(x0, t); }),
                     EndCondition::prescribed([x0 = b.x()](double t) { return grim_reaper_normal_path(x0, t); })});
  return bd;
}

double grim_reaper_distance(const DiscreteCurve& c, double t) {
  double err = 0.0;
  for (const auto& v : c.components[0].vertices)
    err = std::max(err, std::abs(v.y() - t + std::log(std::cos(v.x()))) * std::cos(v.x()));
  return err;
}

FlowTrajectory exact_circle_trajectory(double r0sq_over_2, double t_begin, double t_end, int samples, int n) {
  std::vector<double> times;
  for (int k = 0; k < samples; ++k) times.push_back(t_begin + (t_end - t_begin) * k / (samples - 1));
  return sample_trajectory([=](double t) { return circle(std::sqrt(2.0 * (r0sq_over_2 - t)), n); }, times);
}

}  // namespace

TEST_CASE("straight line does not move") {
  const DiscreteCurve l = line(0.3, 2.0, 41);
  for (Scheme s : {Scheme::Explicit, Scheme::SemiImplicit}) {
    FlowOptions o;
    o.scheme = s;
    const double h = l.min_edge();
    const FlowTrajectory tr = evolve(l, 0.0, 0.01, 0.2 * h * h, o);
    for (std::size_t i = 0; i < 41; ++i)
      CHECK((tr.states.back().components[0].vertices[i] - l.components[0].vertices[i]).norm() < 1e-14);
  }
}

TEST_CASE("shrinking circle follows r^2 = r0^2 - 2t") {
  const int n = 256;
  const double h = 2.0 * pi / n;
  for (Scheme s : {Scheme::Explicit, Scheme::SemiImplicit}) {
    FlowOptions o;
    o.scheme = s;
    // the explicit bound tightens as the circle shrinks, so it runs a shorter horizon
    const double horizon = s == Scheme::Explicit ? 0.1 : 0.2;
    const FlowTrajectory tr = evolve(circle(1.0, n), 0.0, horizon, h * h / 4.0, o, {}, 50);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double exact = std::sqrt(1.0 - 2.0 * tr.times[k]);
      CHECK(std::abs(mean_radius(tr.states[k]) / exact - 1.0) < 1e-3);
    }
  }
}

TEST_CASE("explicit scheme enforces the stability bound") {
  FlowOptions o;
  o.scheme = Scheme::Explicit;
  const DiscreteCurve c = circle(1.0, 64);
  const double h = c.min_edge();
  try {
    step_flow(c, 0.0, 0.5 * h * h, o, {}, h);
    FAIL("expected StabilityViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StabilityViolation);
  }
  CHECK_NOTHROW(step_flow(c, 0.0, 0.39 * h * h, o, {}, h));
}

TEST_CASE("collapse guard fires near extinction") {
  try {
    evolve(circle(1.0, 64), 0.0, 0.6, 1e-4);
    FAIL("expected SingularCollapse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularCollapse);
  }
}

TEST_CASE("Grim Reaper translates with unit speed; error O(h^2) + O(dt)") {
  double prev = 0.0;
  for (int n : {101, 201, 401}) {
    const DiscreteCurve g = grim_reaper(2.5, n);
    const double h = g.mean_edge();
    const FlowTrajectory tr = evolve(g, 0.0, 0.2, h * h, {}, grim_reaper_ends(g), 1000000);
    const double err = grim_reaper_distance(tr.states.back(), 0.2);
    if (prev > 0.0) CHECK(slope(prev, err) > 1.8);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("length strictly decreases on random curves") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    DiscreteCurve c{{fourier_curve(random_fourier(rng, 4), 96)}};
    double len = c.length();
    const FlowTrajectory tr = evolve(c, 0.0, 0.02, 0.002);
    for (const auto& s : tr.states) {
      if (&s == &tr.states.front()) continue;
      CHECK(s.length() < len);
      len = s.length();
    }
  }
}

TEST_CASE("parabolic rescaling") {
  const FlowTrajectory tr = exact_circle_trajectory(0.5, -0.4, -0.1, 7, 64);
  const FlowTrajectory same = parabolic_rescale(tr, 1.0);
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(same.times[k] == tr.times[k]);

  const FlowTrajectory big = parabolic_rescale(tr, 2.0);
  const FlowTrajectory law = exact_circle_trajectory(2.0, -1.6, -0.4, 7, 64);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(big.times[k] == doctest::Approx(law.times[k]));
    CHECK(mean_radius(big.states[k]) == doctest::Approx(mean_radius(law.states[k])).epsilon(1e-13));
    const VectorField h0 = mean_curvature(tr.states[k]);
    const VectorField h1 = mean_curvature(big.states[k]);
    CHECK(h1.values[0][3].norm() == doctest::Approx(h0.values[0][3].norm() / 2.0).epsilon(1e-12));
  }
  const DiscreteCurve l = line(0.2, 1.0, 9);
  const FlowTrajectory st = parabolic_rescale(static_trajectory(l, {-1.0, -0.5}), 0.3);
  CHECK(st.states[1].components[0].vertices[8].isApprox(0.3 * l.components[0].vertices[8]));
}

TEST_CASE("rescaled shrinking circle is the static circle of radius sqrt 2") {
  const FlowTrajectory tr = exact_circle_trajectory(0.0, -std::exp(1.0), -std::exp(-1.0), 4001, 128);
  const FlowTrajectory r = to_rescaled(tr, -1.0, 1.0);
  CHECK(r.mode == TimeMode::Rescaled);
  CHECK(r.size() == 201);
  for (const auto& s : r.states) CHECK(std::abs(mean_radius(s) - std::sqrt(2.0)) < 1e-5);
  CHECK(r.meta.velocity_defect < 1e-3);
  CHECK_THROWS_AS(to_rescaled(tr, -2.0, 1.0), Error);
}

TEST_CASE("static line pair is static in rescaled time") {
  DiscreteCurve pair = line(pi / 4, 3.0, 61);
  pair.components.push_back(line(-pi / 4, 3.0, 61).components[0]);
  const FlowTrajectory tr = static_trajectory(pair, {-10.0, -0.01});
  const FlowTrajectory r = to_rescaled(tr, -1.0, 1.0, 0.5);
  for (const auto& s : r.states) CHECK(hausdorff_to_lines(s, {line_through_origin(pi / 4), line_through_origin(-pi / 4)}, 1.0) < 1e-12);
}

TEST_CASE("rescaled Grim Reaper collapses onto the doubled vertical line") {
  std::vector<double> times;
  for (double tau : {-3.0, -2.0, -1.0}) times.push_back(-std::exp(-tau));
  const FlowTrajectory tr = sample_trajectory([](double t) { return grim_reaper(30.0, 12001, t); }, times);
  const FlowTrajectory r = to_rescaled(tr, -3.0, -1.0, 1.0);
  // Moving backwards in tau the distance shrinks like e^{tau/2} pi/2.
  double prev = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double d = hausdorff_to_lines(r.states[k], {line_through_origin(pi / 2)}, 1.0);
    const double arms = std::exp(r.times[k] / 2.0) * pi / 2.0;
    CHECK(d > prev);
    CHECK(d <= arms);
    CHECK(d > 0.98 * arms);
    prev = d;
  }
}

TEST_CASE("rescaling commutes with time translation by 2 log lambda") {
  const FlowTrajectory tr = exact_circle_trajectory(0.3, -8.0, -0.05, 501, 64);
  const double lambda = 1.5;
  const double shift = 2.0 * std::log(lambda);
  const FlowTrajectory a = to_rescaled(parabolic_rescale(tr, lambda), -1.0 - shift, 0.5 - shift, 0.05);
  const FlowTrajectory b = to_rescaled(tr, -1.0, 0.5, 0.05);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < 64; ++i)
      CHECK((a.states[k].components[0].vertices[i] - b.states[k].components[0].vertices[i]).norm() < 1e-10);
}

TEST_CASE("product evolution pairs factor flows") {
  const AffineLine rz = line_through_origin(0.0);
  const ProductTrajectory plane = product_evolve(rz, line_through_origin(1.0), {0.0, 1.0});
  CHECK(plane.times.size() == 2);
  CHECK(std::get<AffineLine>(plane.state(1).second).angle() == doctest::Approx(1.0));

  const int n = 128;
  const FlowTrajectory circ = evolve(circle(1.0, n), 0.0, 0.1, 1e-3, {}, {}, 10);
  const ProductTrajectory cyl = product_evolve(circ, rz);
  CHECK(cyl.times == circ.times);
  for (std::size_t k = 0; k < cyl.times.size(); ++k) {
    const ProductLagrangian L = cyl.state(k);
    const auto& c = std::get<DiscreteCurve>(L.first);
    CHECK(std::abs(mean_radius(c) - std::sqrt(1.0 - 2.0 * cyl.times[k])) < 2e-3);
  }
  const FlowTrajectory other = evolve(circle(1.0, n), 0.0, 0.1, 2e-3, {}, {}, 10);
  try {
    product_evolve(circ, other);
    FAIL("expected TimeGridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TimeGridMismatch);
  }
  const ProductTrajectory scaled = parabolic_rescale(cyl, 2.0);
  CHECK(scaled.times.back() == doctest::Approx(0.4));
}

TEST_CASE("embeddedness audit") {
  CHECK(!has_self_intersection(circle(1.0, 32)));
  Polyline eight;
  eight.closed = true;
  for (int i = 0; i < 64; ++i) {
    const double s = 2.0 * pi * i / 64;
    eight.vertices.emplace_back(std::sin(s), std::sin(s) * std::cos(s));
  }
  CHECK(has_self_intersection(DiscreteCurve{{eight}}));
  DiscreteCurve cross_pair = line(0.5, 1.0, 5);
  cross_pair.components.push_back(line(-0.5, 1.0, 5).components[0]);
  CHECK(has_self_intersection(cross_pair));
}

TEST_CASE("redistribution equalizes edges and is recorded") {
  Polyline p;
  for (int i = 0; i < 20; ++i) {
    const double s = std::pow(i / 19.0, 2.0);
    p.vertices.emplace_back(s, 0.0);
  }
  const DiscreteCurve r = redistribute(DiscreteCurve{{p}});
  for (std::size_t e = 0; e < 19; ++e) CHECK(r.components[0].edge_length(e) == doctest::Approx(1.0 / 19.0));
  FlowOptions o;
  o.redistribute_every = 10;
  const FlowTrajectory tr = evolve(circle(1.0, 64), 0.0, 0.01, 1e-3, o);
  CHECK(tr.remeshed[10] == 1);
  CHECK(tr.remeshed[9] == 0);
  CHECK(tr.meta.redistribute_every == 10);
}
