#pragma once

#include "lmcf/flow.hpp"
#include "lmcf/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lmcf {

// Time derivatives along a trajectory are taken in the normal direction: the tangential part of the
// vertex velocity (x_{k+1} - x_k) / dt is removed by the arclength gradient. Open components lose a
// two-vertex collar at each end in every residual.

// Boundary values for open components: Hold keeps the initial end values; Callback supplies
// value(component, end, t, position) with end 0 = first vertex, 1 = last.
struct HeatBoundary {
  enum class Kind { Hold, Callback };
  Kind kind = Kind::Hold;
  std::function<double(std::size_t, int, double, const Vec2&)> value;

  static HeatBoundary hold() { return {}; }
  static HeatBoundary callback(std::function<double(std::size_t, int, double, const Vec2&)> f) {
    return {Kind::Callback, std::move(f)};
  }
};

struct ResidualReport {
  std::vector<double> times;  // t_{k+1} of each step
  std::vector<double> sup;    // max |(d_t - Delta) f| over interior vertices
  std::vector<double> l2;     // arclength-weighted L2 norm over interior vertices
  double max_sup = 0.0;
};

// (d_t - Delta) f - source along the trajectory, one entry per step; f[k] lives on states[k].
// With constant_gauge, a per-step per-component constant (the L2-optimal one) is removed first.
ResidualReport heat_residual(const FlowTrajectory& traj, const std::vector<ScalarField>& f,
                             bool constant_gauge = false,
                             const std::vector<ScalarField>* source = nullptr);

struct CaloricField {
  std::vector<double> times;
  std::vector<ScalarField> values;
  ResidualReport residual;
  int growth_degree = 0;
  std::vector<double> growth_constant;  // max |f| / (1 + |x|^d) per time
  // Declared barrier C0 e^{C1 (t - t0)} (1 + |x|^d) with C0 the initial constant and
  // C1 = d (d + 2); growth_ok when every sampled constant stays below it.
  bool growth_ok = true;
};

// Implicit heat solve (M_{k+1} + dt K_{k+1}) f_{k+1} = M_{k+1} f_k along the trajectory, with the
// tangential-slide correction when vertices are not moved normally. f0.growth_degree is the
// declared polynomial growth; throws GrowthUnbounded when f0 exceeds 1e6 (1 + |x|^d).
CaloricField solve_heat_on_flow(const FlowTrajectory& traj, const ScalarField& f0,
                                const HeatBoundary& boundary = {});

// x . direction on each state.
ScalarField coordinate_field(const DiscreteCurve& c, const Vec2& direction);
std::vector<ScalarField> coordinate_fields(const FlowTrajectory& traj, const Vec2& direction);
std::vector<ScalarField> constant_fields(const FlowTrajectory& traj, double value);

// ---------------------------------------------------------------------------------------------

struct BetaCaloricReport {
  ResidualReport residual;     // of beta + 2 t theta after the per-step gauge
  std::vector<ScalarField> beta;  // caloric gauge: beta_k + c_k, c_0 = 0
  std::vector<ScalarField> theta;
  std::vector<std::vector<double>> gauge;  // c_k per component
};

// beta per state from exactness_primitive (anchored at the vertex nearest the origin), theta from
// lagrangian_angle; per-component gauge constants chosen step by step so that beta + 2 t theta is
// closest to caloric. Propagates NotExact.
BetaCaloricReport beta_caloric_check(const FlowTrajectory& traj);

// Product with a line factor: the field beta_1 + beta_2 + 2 t (theta_1 + theta_2) on the product
// grid of curve vertices and `line_samples` points of the line in [-1, 1].
ResidualReport beta_caloric_check(const ProductTrajectory& traj, int line_samples = 21);

struct BFieldReport {
  std::vector<ScalarField> B;       // cos(beta + 2 (t - s1) theta), caloric gauge
  ResidualReport residual;          // of (d_t - Delta) B - |x^perp + 2 (s1 - t) H|^2 B
  double defect_at_s1 = 0.0;        // max |B - cos beta| on the state at s1
  std::size_t s1_index = 0;
};

// Requires s1 to be one of the recorded times (within 1e-12).
BFieldReport evolve_B(const FlowTrajectory& traj, double s1);
// Product with a line factor; the residual is taken on the product grid.
BFieldReport evolve_B(const ProductTrajectory& traj, double s1, int line_samples = 21);

// ---------------------------------------------------------------------------------------------

// Height comparison of a curve factor against oriented limit lines. For products gamma x R the
// heat solution with data B z factors through the curve: with z read on the curve (CurveCoordinate)
// the product field is h(p); with z the line coordinate (LineFactor) it is u(p) z and the sup over
// the product component inside B_2 is sup_p sqrt(4 - |p|^2) |b_j - u(p)|.
struct HeightSetup {
  enum class ZMode { CurveCoordinate, LineFactor };
  ZMode mode = ZMode::CurveCoordinate;
  Vec2 e_z = Vec2(0.0, -1.0);      // CurveCoordinate only
  std::vector<AffineLine> limit;   // oriented limit lines, one per label
  double inner_radius = 2.0;
  double outer_radius = 3.0;
  double delta = 0.05;             // Hausdorff bound used by the labeling margin
};

struct HeightComponent {
  int label = 0;
  double beta_bar = 0.0;   // arclength mean of beta(-1) over the same-label component of M_{-1} in B_inner
  double theta_bar = 0.0;  // angle of the limit line
  double b_bar = 0.0;      // cos(beta_bar - 2 (1 + s1) theta_bar)
  double sup_difference = 0.0;
};

struct HeightReport {
  double s1 = 0.0;
  std::vector<HeightComponent> components;
  double sup_difference = 0.0;  // max over labels
  double separation = 0.0;      // distance between the two labeled components at s1
};

// Trajectory starting at t = -1 (recorded times must include s1). Components are extracted on the
// states at s1 and at -1 with extract_curve_components; propagates ComponentAmbiguity.
HeightReport approx_height_solution(const FlowTrajectory& traj, double s1, const HeightSetup& setup);

// Scan candidate s1 values (recorded times) and keep the one with the largest component separation;
// candidates where extraction fails are skipped. Throws ComponentAmbiguity if none succeeds.
HeightReport select_s1_and_height(const FlowTrajectory& traj, const std::vector<double>& candidates,
                                  const HeightSetup& setup);

// ---------------------------------------------------------------------------------------------

struct RefinementVerdict {
  std::vector<double> slopes;  // log2 ratios between successive levels (h halved each level)
  bool pass = false;
};

// Residuals on a ladder with h halved and dt quartered per level: pass when every slope is at
// least min_slope, or the finer residual is already below floor.
RefinementVerdict richardson_verdict(const std::vector<double>& residuals, double min_slope = 1.8,
                                     double floor = 1e-10);

}  // namespace lmcf
