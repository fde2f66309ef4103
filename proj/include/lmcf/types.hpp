#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace lmcf {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;

// Complex structure on C = R^2: J(x, y) = (-y, x).
inline Vec2 rotate_j(const Vec2& v) { return Vec2(-v.y(), v.x()); }

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// J on C^n stored as interleaved real coordinates (x1, y1, x2, y2, ...).
VecX apply_j(const VecX& v);

// Wrap an angle difference into (-pi, pi].
double wrap_angle(double a);

}  // namespace lmcf
