#include "lmcf/curve_io.hpp"
#include "lmcf/geometry.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <sstream>

using namespace lmcf;
using namespace lmcf::test;

namespace {

double max_interior(const std::vector<double>& v, std::size_t collar) {
  double m = 0.0;
  for (std::size_t i = collar; i + collar < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

// Simpson integral of lambda along the smooth Grim Reaper from s0 to s.
double grim_reaper_beta_oracle(double s0, double s1, int panels) {
  auto integrand = [](double s) {
    const Vec2 p = grim_reaper_point(s);
    const Vec2 d(1.0 / std::cosh(s), std::tanh(s));
    return p.x() * d.y() - p.y() * d.x();
  };
  const double h = (s1 - s0) / panels;
  double acc = integrand(s0) + integrand(s1);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(s0 + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("angle of a straight line is its direction") {
  for (double a : {0.0, 0.3, -2.0, 3.0}) {
    const ScalarField th = lagrangian_angle(line(a, 2.0, 17));
    for (double v : th.values[0]) CHECK(std::abs(wrap_angle(v - a)) < 1e-14);
  }
}

TEST_CASE("circle angle is polar angle plus pi/2 and unwraps by 2 pi") {
  const int n = 64;
  const ScalarField th = lagrangian_angle(circle(1.7, n));
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * pi * i / n;
    CHECK(std::abs(wrap_angle(th.values[0][i] - phi - pi / 2)) < 1e-12);
  }
  for (int i = 0; i + 1 < n; ++i) CHECK(std::abs(th.values[0][i + 1] - th.values[0][i]) < 0.2);
  CHECK(th.seam_jump[0] == doctest::Approx(2.0 * pi).epsilon(1e-14));
}

TEST_CASE("product of two lines has the summed angle") {
  ProductLagrangian L{line(0.4, 1.0, 5), line_through_origin(-1.1)};
  const ProductField f = product_angle(L);
  for (Eigen::Index i = 0; i < f.blocks[0][0].rows(); ++i) CHECK(f.blocks[0][0](i, 0) == doctest::Approx(0.4 - 1.1));
}

TEST_CASE("product angle additivity is exact on random curves") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    DiscreteCurve a{{fourier_curve(random_fourier(rng, 3), 40)}};
    DiscreteCurve b{{fourier_curve(random_fourier(rng, 2), 33)}};
    const ProductField f = product_angle({a, b});
    const auto ta = lagrangian_angle(a).values[0];
    const auto tb = lagrangian_angle(b).values[0];
    for (std::size_t i = 0; i < ta.size(); ++i)
      for (std::size_t j = 0; j < tb.size(); ++j) REQUIRE(f.blocks[0][0](i, j) == ta[i] + tb[j]);
  }
}

TEST_CASE("mean curvature of a line vanishes") {
  const VectorField h = mean_curvature(line(0.7, 3.0, 31));
  for (const auto& v : h.values[0]) CHECK(v.norm() < 1e-12);
}

TEST_CASE("mean curvature of a circle is inward with magnitude 1/r") {
  const double r = 2.5;
  for (int n : {64, 256}) {
    const DiscreteCurve c = circle(r, n);
    const VectorField h = mean_curvature(c);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec2 x = c.components[0].vertices[i];
      err = std::max(err, (h.values[0][i] + x / (r * r)).norm());
    }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("Grim Reaper curvature equals the normal part of e_y at rate h^2") {
  double prev = 0.0;
  for (int n : {201, 401, 801}) {
    const DiscreteCurve g = grim_reaper(3.0, n);
    const VectorField h = mean_curvature(g);
    const auto& v = g.components[0].vertices;
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      const double x = v[i].x();
      const Vec2 oracle(-std::sin(x) * std::cos(x), std::cos(x) * std::cos(x));
      err = std::max(err, (h.values[0][i] - oracle).norm());
    }
    if (prev > 0.0) CHECK(slope(prev, err) > 1.8);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("H = J grad theta at first order under refinement") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto coef = random_fourier(rng, 3);
    double prev = 0.0;
    for (int n : {128, 256, 512}) {
      DiscreteCurve c{{fourier_curve(coef, n)}};
      const VectorField h = mean_curvature(c);
      const VectorField g = arclength_gradient(c, lagrangian_angle(c));
      double err = 0.0;
      for (int i = 0; i < n; ++i) err = std::max(err, (h.values[0][i] - rotate_j(g.values[0][i])).norm());
      if (prev > 0.0) CHECK(slope(prev, err) > 0.9);
      prev = err;
    }
  }
}

TEST_CASE("exactness primitive of a line through the origin is zero") {
  const ScalarField b = exactness_primitive(line(1.2, 4.0, 9));
  CHECK(b.max_abs() < 1e-15);
}

TEST_CASE("circle is not exact and reports twice the enclosed area") {
  const double r = 1.3;
  const int n = 512;
  try {
    exactness_primitive(circle(r, n));
    FAIL("expected NotExact");
  } catch (const NotExactError& e) {
    CHECK(e.code() == ErrorCode::NotExact);
    CHECK(e.holonomy() == doctest::Approx(n * r * r * std::sin(2.0 * pi / n)).epsilon(1e-13));
    CHECK(std::abs(e.holonomy() - 2.0 * pi * r * r) < 1e-3);
  }
}

TEST_CASE("Grim Reaper primitive matches the smooth quadrature oracle at order h^2") {
  const double smax = 2.5;
  double prev = 0.0;
  for (int n : {101, 201, 401}) {
    const DiscreteCurve g = grim_reaper(smax, n);
    const ScalarField b = exactness_primitive(g);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = -smax + 2.0 * smax * i / (n - 1);
      err = std::max(err, std::abs(b.values[0][i] - grim_reaper_beta_oracle(-smax, s, 20 * (i + 1))));
    }
    if (prev > 0.0) CHECK(slope(prev, err) > 1.8);
    prev = err;
  }
}

TEST_CASE("d beta equals the edge integral of lambda exactly; anchors shift") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Polyline p;
    for (int i = 0; i < 12; ++i) p.vertices.emplace_back(u(rng), u(rng));
    DiscreteCurve c{{p}};
    ExactnessOptions opts;
    opts.anchors.push_back(std::make_pair(std::size_t{5}, 0.25));
    const ScalarField b = exactness_primitive(c, opts);
    CHECK(b.values[0][5] == doctest::Approx(0.25));
    for (int i = 0; i + 1 < 12; ++i)
      CHECK(b.values[0][i + 1] - b.values[0][i] ==
            doctest::Approx(cross(p.vertices[i], p.vertices[i + 1])).epsilon(1e-12));
  }
}

TEST_CASE("normal projection") {
  const DiscreteCurve l = line(0.9, 2.0, 11);
  for (std::size_t i = 0; i < 11; ++i) CHECK(normal_projection(l, 0, i).norm() < 1e-15);
  const DiscreteCurve c = circle(1.5, 128);
  for (std::size_t i = 0; i < 128; ++i) {
    const Vec2 x = c.components[0].vertices[i];
    CHECK((normal_projection(c, 0, i) - x).norm() < 1e-12);
  }
}

TEST_CASE("|grad beta| = |x^perp| at first order on the Grim Reaper") {
  double prev = 0.0;
  for (int n : {101, 201, 401}) {
    const DiscreteCurve g = grim_reaper(2.5, n);
    const VectorField gb = arclength_gradient(g, exactness_primitive(g));
    std::vector<double> diff(n);
    for (int i = 0; i < n; ++i) diff[i] = gb.values[0][i].norm() - normal_projection(g, 0, i).norm();
    const double err = max_interior(diff, 2);
    if (prev > 0.0) CHECK(slope(prev, err) > 0.9);
    prev = err;
  }
  // J x^perp = grad beta as vectors, not only in norm.
  const DiscreteCurve g = grim_reaper(2.5, 801);
  const VectorField gb = arclength_gradient(g, exactness_primitive(g));
  for (int i = 2; i < 799; ++i) CHECK((rotate_j(normal_projection(g, 0, i)) - gb.values[0][i]).norm() < 1e-3);
}

TEST_CASE("J squares to minus the identity") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    VecX v(6);
    for (auto& x : v) x = g(rng);
    CHECK((apply_j(apply_j(v)) + v).norm() == 0.0);
  }
}

TEST_CASE("curve validation") {
  DiscreteCurve c{{Polyline{{Vec2(0, 0), Vec2(1, 0)}, false, 0}}};
  CHECK_THROWS_AS(validate(c), Error);
  DiscreteCurve d = line(0.0, 1.0, 5);
  d.components[0].vertices[2] = d.components[0].vertices[1];
  try {
    validate(d);
    FAIL("expected DegenerateEdge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateEdge);
  }
  CHECK_THROWS_AS(lagrangian_angle(d), Error);
}

TEST_CASE("curve text format round-trips bit-exactly") {
  DiscreteCurve c = circle(1.0 / 3.0, 16);
  DiscreteCurve l = line(0.1, 2.0, 7);
  l.components[0].component_id = 4;
  c.components.push_back(l.components[0]);
  std::stringstream ss;
  write_curve(ss, c);
  const DiscreteCurve back = read_curve(ss);
  REQUIRE(back.components.size() == 2);
  CHECK(back.components[0].closed);
  CHECK(!back.components[1].closed);
  CHECK(back.components[1].component_id == 4);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < c.components[k].size(); ++i)
      CHECK(back.components[k].vertices[i] == c.components[k].vertices[i]);
}
