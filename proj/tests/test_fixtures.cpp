#include "lmcf/curve_io.hpp"
#include "lmcf/error.hpp"
#include "lmcf/fixtures.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace lmcf;
using namespace lmcf::test;

TEST_CASE("every catalogued fixture generates and passes its audit") {
  CHECK(fixture_catalog().size() == 12);
  for (const auto& info : fixture_catalog()) {
    CAPTURE(info.name);
    const Fixture f = generate_fixture(info.name);
    CHECK(f.audit_ok());
    CHECK_FALSE(f.audit.empty());
    CHECK(f.params == info.defaults);
  }
}

TEST_CASE("circle fixture matches the closed-form circle") {
  const Fixture f = generate_fixture("circle", {{"r", 1.0}, {"N", 256}});
  const DiscreteCurve oracle = circle(1.0, 256);
  REQUIRE(f.curve);
  CHECK(f.curve->components[0].closed);
  for (int i = 0; i < 256; ++i) {
    CHECK((f.curve->components[0].vertices[i] - oracle.components[0].vertices[i]).norm() < 1e-15);
    CHECK(f.reference.at("theta").values[0][i] == doctest::Approx(2.0 * pi * i / 256 + pi / 2));
  }
}

TEST_CASE("plane-pair-m1 fixture") {
  const Fixture f = generate_fixture("plane-pair-m1", {{"theta1", pi / 4}, {"theta2", -pi / 4}});
  REQUIRE(f.pair);
  CHECK(f.pair->intersection_dim == 1);
  CHECK(f.pair->planes[0].angle == doctest::Approx(pi / 4));
  CHECK(f.pair->planes[1].angle == doctest::Approx(-pi / 4));
  CHECK(f.surfaces.size() == 2);
  CHECK(f.pair->frame.e_w.isApprox(apply_j(f.pair->frame.e_z)));
}

TEST_CASE("grim-reaper fixture lies on y = -log cos x with theta = x") {
  const Fixture f = generate_fixture("grim-reaper", {{"delta", 0.05}, {"N", 512}});
  REQUIRE(f.curve);
  const Polyline& p = f.curve->components[0];
  CHECK_FALSE(p.closed);
  CHECK(p.size() == 512);
  CHECK(p.vertices.front().x() == doctest::Approx(-(pi / 2 - 0.05)));
  CHECK(p.vertices.back().x() == doctest::Approx(pi / 2 - 0.05));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2 v = p.vertices[i];
    CHECK(std::abs(v.y() + std::log(std::cos(v.x()))) < 1e-9);
    CHECK(f.reference.at("theta").values[0][i] == doctest::Approx(v.x()).epsilon(1e-14));
  }
  // arclength sampling: all edges equal to the closed-form spacing
  const double s_max = std::asinh(std::tan(pi / 2 - 0.05));
  CHECK(p.min_edge() == doctest::Approx(2.0 * s_max / 511).epsilon(1e-3));
  REQUIRE(f.frame);
  CHECK(f.frame->e_z.isApprox(Vec2(0.0, -1.0)));
  CHECK(f.frame->e_w.isApprox(Vec2(1.0, 0.0)));
}

TEST_CASE("fixture parameters are checked") {
  try {
    generate_fixture("no-such-thing");
    FAIL("expected UnknownFixture");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownFixture);
  }
  CHECK_THROWS_AS(generate_fixture("circle", {{"radius", 2.0}}), Error);
  CHECK_THROWS_AS(generate_fixture("circle", {{"N", 3}}), Error);
  CHECK_THROWS_AS(generate_fixture("grim-reaper", {{"delta", 2.0}}), Error);
}

TEST_CASE("surface text format round trip and fixture bundle") {
  const Fixture f = generate_fixture("tilted-pair");
  std::stringstream ss;
  write_surface(ss, f.surfaces[0]);
  const SurfaceMesh back = read_surface(ss);
  REQUIRE(back.vertices.size() == f.surfaces[0].vertices.size());
  CHECK(back.triangles == f.surfaces[0].triangles);
  for (std::size_t i = 0; i < back.vertices.size(); ++i) CHECK(back.vertices[i] == f.surfaces[0].vertices[i]);
  std::stringstream bad("# lmcf-surface v1\nt,0,1,2\n");
  CHECK_THROWS_AS(read_surface(bad), Error);

  const auto dir = std::filesystem::temp_directory_path() / "lmcf_fixture_test";
  std::filesystem::remove_all(dir);
  const auto files = save_fixture(generate_fixture("smoothed-pair"), dir.string());
  CHECK(files.size() == 2);
  const DiscreteCurve c = load_curve((dir / "smoothed-pair.curve.csv").string());
  CHECK(c.components.size() == 2);
  std::filesystem::remove_all(dir);
}
