#pragma once

#include "lmcf/geometry.hpp"
#include "lmcf/plane_pair.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace lmcf {

// ---------------------------------------------------------------------------------------------
// Curves (n = 1, and products gamma x R reduced to their curve factor).

// A run of consecutive vertices [first, last] of one polyline component inside B_outer.
struct CurveComponent {
  int label = -1;  // index into the limit lines; -1 for leftovers
  std::size_t component = 0;
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive; may wrap on closed components (first > last)
  double inner_mass = 0.0;  // length inside B_inner
  std::size_t polyline_size = 0;  // vertex count of the polyline component
  std::vector<std::size_t> vertices() const;
};

struct CurveExtraction {
  std::vector<CurveComponent> labeled;  // labeled[j].label == j
  std::vector<CurveComponent> leftovers;
  double discard_fraction = 0.01;  // components below this share of the B_inner length are dropped
  double separation = 0.0;         // min distance between the two labeled components
  double label_margin = 0.0;       // score gap between the best and second-best labeling
};

// Runs of the curve inside B_outer that meet B_inner, the two longest (by B_inner length) labeled
// by oriented distance to the limit lines: mean distance plus |e^{i theta_c} - e^{i theta_j}| with
// theta_c the mean tangent direction. Throws ComponentAmbiguity with fewer than two components or a
// labeling margin below 2 delta.
CurveExtraction extract_curve_components(const DiscreteCurve& c, const std::vector<AffineLine>& limit,
                                         double inner = 2.0, double outer = 3.0, double delta = 0.05);

// ---------------------------------------------------------------------------------------------
// Surfaces in C^2 = R^4.

struct SurfaceMesh {
  std::vector<Vec4> vertices;
  std::vector<std::array<int, 3>> triangles;  // oriented
};

// Grid of nu x nv samples of f on [u0, u1] x [v0, v1], two triangles per cell, oriented by (u, v).
SurfaceMesh parametric_surface(const std::function<Vec4(double, double)>& f, double u0, double u1,
                               double v0, double v1, int nu, int nv);
// Square patch [-half_width, half_width]^2 of plane j of a pair (intrinsic coordinates).
SurfaceMesh plane_patch(const PlanePairConfig& cfg, int j, double half_width, int samples,
                        const Vec4& offset = Vec4::Zero());
SurfaceMesh merge(const SurfaceMesh& a, const SurfaceMesh& b);

struct SurfaceComponent {
  int label = -1;
  std::vector<int> triangles;
  double inner_mass = 0.0;  // area inside B_inner
};

struct SurfaceExtraction {
  std::vector<SurfaceComponent> labeled;
  std::vector<SurfaceComponent> leftovers;
  double discard_fraction = 0.01;
  double label_margin = 0.0;
};

// Connected components (shared vertices) of the triangles meeting B_outer that have area inside
// B_inner; the two largest are labeled by mean distance to the planes of the pair. Throws
// ComponentAmbiguity when fewer than two components remain or the labeling margin is below 2 delta.
SurfaceExtraction extract_components(const SurfaceMesh& mesh, const PlanePairConfig& cfg,
                                     double inner = 2.0, double outer = 3.0, double delta = 0.05);
// Sub-mesh made of the given triangles.
SurfaceMesh component_mesh(const SurfaceMesh& mesh, const SurfaceComponent& c);

// ---------------------------------------------------------------------------------------------

struct SliceCurve {
  std::vector<Vec4> vertices;  // closed polygon on the sphere (arcs subdivided)
  double exact_length = 0.0;   // sum of the exact circle arcs
};

struct SphereSlice {
  double radius = 0.0;  // radius actually used
  int retries = 0;
  std::vector<SliceCurve> curves;
};

// Intersection with the sphere |x| = R, triangle by triangle as exact circle arcs (the plane of a
// triangle meets the sphere in a circle); each arc is subdivided into `arc_points` segments.
// Orientation: boundary orientation of the part inside the ball. When a vertex lies within 1e-9 R
// of the sphere or a triangle is tangent to it, R grows by 0.003 (at most 10 times), else
// NoTransverseRadius.
SphereSlice sphere_slice(const SurfaceMesh& mesh, double R, int arc_points = 8);

struct LinkingResult {
  double raw = 0.0;
  int value = 0;
  double margin = 0.0;  // |raw - value|
  Vec4 pole;
  double min_distance = 0.0;  // between the curves
};

// Gauss linking number of two closed curves on a sphere centered at 0: stereographic projection
// from a pole far from both curves (seeded search, or the given pole), exact solid-angle formula per
// segment pair. Throws CurvesTooClose when the curves are closer than 10 x the longest edge and
// RoundingAmbiguity when |raw - round(raw)| >= 0.1.
LinkingResult linking_number(const std::vector<Vec4>& a, const std::vector<Vec4>& b,
                             std::uint64_t seed = 1);
LinkingResult linking_number_with_pole(const std::vector<Vec4>& a, const std::vector<Vec4>& b,
                                       const Vec4& pole);
// Gauss linking number of closed polygons in R^3.
double gauss_linking_r3(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b);

// Candidate poles ordered by decreasing distance from both curves.
std::vector<Vec4> admissible_poles(const std::vector<Vec4>& a, const std::vector<Vec4>& b, int count,
                                   std::uint64_t seed);

// Hopf fiber through the unit point p of S^3: t -> e^{it} p.
std::vector<Vec4> hopf_fiber(const Vec4& p, int samples);

// ---------------------------------------------------------------------------------------------

struct SeparationReport {
  bool pass = false;
  // Minimum signed slack of each inclusion: Sigma_1 in H_+ and Sigma_2 in H_- on {z > 1/2},
  // Sigma_1 in H_- and Sigma_2 in H_+ on {z < -1/2}.
  std::array<double, 4> margins{};
  double margin = 0.0;  // min of the four
};

// Half-spaces H_+- = {w >< phi + lambda b0 z} with z, w read in the frame. Vertices within
// `radius` are tested; with global_check the z restriction is dropped and both inclusions must hold
// everywhere (Sigma_1 in H_+, Sigma_2 in H_-).
SeparationReport halfspace_separation(const SurfaceMesh& s1, const SurfaceMesh& s2,
                                      const CoordinateFrame& frame, double phi, double lambda,
                                      double b0, double radius = 2.0, bool global_check = false);

// Graph of w = phi + lambda b z over plane j of an m = 1 pair: x + (phi + lambda b z(x)) e_w.
SurfaceMesh tilted_plane(const PlanePairConfig& cfg, int j, double phi, double lambda, double b,
                         double half_width, int samples);

// Whether two triangle meshes share a point inside B_R (triangle pairs solved as 4 x 4 systems).
bool surfaces_intersect(const SurfaceMesh& a, const SurfaceMesh& b, double R);

}  // namespace lmcf
