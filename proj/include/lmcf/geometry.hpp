#pragma once

#include "lmcf/error.hpp"
#include "lmcf/types.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lmcf {

// One connected component of a polyline immersion in C = R^2.
// For closed components the closing edge runs from the last vertex back to the first;
// the first vertex is not repeated.
struct Polyline {
  std::vector<Vec2> vertices;
  bool closed = false;
  int component_id = 0;

  std::size_t size() const { return vertices.size(); }
  std::size_t edge_count() const { return closed ? vertices.size() : vertices.size() - 1; }
  Vec2 edge(std::size_t i) const { return vertices[(i + 1) % vertices.size()] - vertices[i]; }
  double edge_length(std::size_t i) const { return edge(i).norm(); }
  double length() const;
  double min_edge() const;
  double mean_edge() const;
};

// Oriented polyline immersion in R^2, possibly multi-component: the n = 1 Lagrangian.
struct DiscreteCurve {
  std::vector<Polyline> components;

  std::size_t vertex_count() const;
  double length() const;
  double min_edge() const;
  double mean_edge() const;
};

// Throws InvalidCurve / DegenerateEdge when the invariants fail
// (>= 8 vertices closed, >= 3 open, no zero-length edges).
void validate(const DiscreteCurve& curve);

// Per-vertex scalar data on a (multi-component) curve.
struct ScalarField {
  std::string name;
  std::vector<std::vector<double>> values;  // [component][vertex]
  // For closed components: value gained after one loop in the direction of orientation
  // (2 pi times the turning number for the angle; 0 for single-valued fields).
  std::vector<double> seam_jump;
  int growth_degree = 0;

  double max_abs() const;
};

struct VectorField {
  std::vector<std::vector<Vec2>> values;
};

ScalarField make_field(const DiscreteCurve& curve, const std::string& name, double value = 0.0);

// Unwrapped tangent angle per vertex. Vertex values interpolate the two adjacent edge angles
// to the vertex (arclength weights); endpoints of open components take the adjacent edge angle.
ScalarField lagrangian_angle(const DiscreteCurve& curve);

// Unwrapped per-edge tangent angles of one component; size edge_count() + 1 for closed
// components (last entry closes the loop).
std::vector<double> edge_angles(const Polyline& p);

// Second difference of position with arclength weights: H_i = 2 (t_i - t_{i-1}) / (l_{i-1} + l_i).
// Open endpoints copy the neighbouring interior value.
VectorField mean_curvature(const DiscreteCurve& curve);

// Unit tangent per vertex (normalized sum of adjacent unit edge vectors; one-sided at endpoints).
VectorField vertex_tangents(const DiscreteCurve& curve);

// Arclength gradient (as a tangent vector) of a vertex field: centered differences in the interior,
// one-sided at open endpoints; the seam jump is honoured on closed components.
VectorField arclength_gradient(const DiscreteCurve& curve, const ScalarField& f);

// Dual (Voronoi) lengths per vertex: half the sum of adjacent edge lengths.
std::vector<std::vector<double>> dual_lengths(const DiscreteCurve& curve);

struct ExactnessOptions {
  // Optional anchor: beta(component, vertex) = value. Default anchors vertex 0 to 0.
  std::vector<std::optional<std::pair<std::size_t, double>>> anchors;
  double holonomy_tolerance = 1e-8;  // relative to total curve length
};

// Liouville form lambda = x dy - y dx integrated edge by edge (exact on straight edges: cross(p, q)).
double liouville_edge_integral(const Vec2& p, const Vec2& q);

// Primitive beta with d beta = lambda along each component. Throws NotExactError on closed
// components with |holonomy| > tolerance * length.
ScalarField exactness_primitive(const DiscreteCurve& curve, const ExactnessOptions& opts = {});

// Holonomy of lambda around each closed component (0 for open ones).
std::vector<double> liouville_holonomy(const DiscreteCurve& curve);

// x^perp at a vertex: position minus its component along the vertex tangent.
Vec2 normal_projection(const DiscreteCurve& curve, std::size_t component, std::size_t vertex);

// Vertex index of the point closest to the origin on a component.
std::size_t nearest_origin_vertex(const Polyline& p);

// Oscillation sup theta - inf theta, reported as pi - epsilon for the almost-calibrated margin.
double angle_oscillation(const ScalarField& theta);

// ---------------------------------------------------------------------------------------------
// Products in C^2 = C x C.

// Affine line {point + s * direction} in one C factor.
struct AffineLine {
  Vec2 point = Vec2::Zero();
  Vec2 direction = Vec2(1.0, 0.0);  // unit

  double angle() const { return std::atan2(direction.y(), direction.x()); }
  // Liouville primitive along the line with beta(point) = 0: beta(s) = cross(point, direction) * s.
  double beta(double s) const { return cross(point, direction) * s; }
  Vec2 at(double s) const { return point + s * direction; }
};

AffineLine line_through_origin(double angle);

using Factor = std::variant<DiscreteCurve, AffineLine>;

// L = gamma_1 x gamma_2 in C^2 with coordinates (x1, y1, x2, y2).
struct ProductLagrangian {
  Factor first;
  Factor second;
};

// Sample a factor: vertices of a curve, or points s * direction + point for s in the given list.
std::vector<Vec2> factor_points(const Factor& f, const std::vector<double>& line_params);

// theta_1 + theta_2 on the product grid [component of first][component of second](i, j).
// A line factor is constant along the line and contributes a single row/column.
struct ProductField {
  std::vector<std::vector<MatX>> blocks;
};
ProductField product_angle(const ProductLagrangian& L);

// Mean curvature of the product at grid point (i, j): (H1_i, H2_j).
Vec4 product_mean_curvature(const VectorField& h1, std::size_t c1, std::size_t i,
                            const VectorField& h2, std::size_t c2, std::size_t j);

}  // namespace lmcf
