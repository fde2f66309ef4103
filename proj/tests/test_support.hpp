#pragma once

// Independent closed-form samplers used as oracles by the unit tests. These do not go through the
// fixture generators so the fixture module can be checked against them.

#include "lmcf/geometry.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace lmcf::test {

inline Polyline circle_polyline(double r, int n, Vec2 center = Vec2::Zero(), double phase = 0.0) {
  Polyline p;
  p.closed = true;
  for (int i = 0; i < n; ++i) {
    const double phi = phase + 2.0 * pi * i / n;
    p.vertices.push_back(center + r * Vec2(std::cos(phi), std::sin(phi)));
  }
  return p;
}

inline DiscreteCurve circle(double r, int n) { return {{circle_polyline(r, n)}}; }

inline DiscreteCurve line(double angle, double half_length, int n, Vec2 offset = Vec2::Zero()) {
  Polyline p;
  const Vec2 d(std::cos(angle), std::sin(angle));
  for (int i = 0; i < n; ++i) p.vertices.push_back(offset + (-half_length + 2.0 * half_length * i / (n - 1)) * d);
  return {{p}};
}

// Grim Reaper y = -log cos x in arclength parametrization s -> (atan(sinh s), log cosh s).
inline Vec2 grim_reaper_point(double s) { return {std::atan(std::sinh(s)), std::log(std::cosh(s))}; }

inline DiscreteCurve grim_reaper(double s_max, int n, double t = 0.0) {
  Polyline p;
  for (int i = 0; i < n; ++i) {
    const double s = -s_max + 2.0 * s_max * i / (n - 1);
    p.vertices.push_back(grim_reaper_point(s) + Vec2(0.0, t));
  }
  return {{p}};
}

// Smooth random closed curve: radius 1 + small Fourier perturbation (star-shaped, embedded).
inline std::vector<double> random_fourier(std::mt19937_64& rng, int modes) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(2 * modes);
  for (auto& x : c) x = 0.15 * u(rng) / modes;
  return c;
}

inline Polyline fourier_curve(const std::vector<double>& c, int n) {
  Polyline p;
  p.closed = true;
  const int modes = static_cast<int>(c.size() / 2);
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * pi * i / n;
    double r = 1.0;
    for (int m = 0; m < modes; ++m) r += c[2 * m] * std::cos((m + 2) * phi) + c[2 * m + 1] * std::sin((m + 2) * phi);
    p.vertices.push_back(r * Vec2(std::cos(phi), std::sin(phi)));
  }
  return p;
}

inline double slope(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace lmcf::test
