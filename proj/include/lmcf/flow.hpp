#pragma once

#include "lmcf/geometry.hpp"

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lmcf {

enum class Scheme { Explicit, SemiImplicit };
enum class TimeMode { Unrescaled, Rescaled };

const char* scheme_name(Scheme s);

// Boundary motion of one endpoint of an open component.
struct EndCondition {
  enum class Kind { Fixed, Prescribed };
  Kind kind = Kind::Fixed;
  std::function<Vec2(double)> path;  // position at time t (Prescribed only)

  static EndCondition fixed() { return {}; }
  static EndCondition prescribed(std::function<Vec2(double)> p) {
    return {Kind::Prescribed, std::move(p)};
  }
};

// ends[k] = {first vertex, last vertex} of component k; components without an entry are fixed.
struct FlowBoundary {
  std::vector<std::array<EndCondition, 2>> ends;
};

struct FlowOptions {
  Scheme scheme = Scheme::SemiImplicit;
  double stability_constant = 0.4;  // explicit scheme: dt <= c * h_min^2
  int redistribute_every = 0;       // arclength redistribution cadence in steps; 0 disables
  double collapse_ratio = 1e-3;     // SingularCollapse below this fraction of the initial mean edge
  bool audit_embeddedness = false;
};

struct RunMetadata {
  std::string scheme = "semi-implicit";
  double dt = 0.0;
  double h = 0.0;
  int redistribute_every = 0;
  double stability_constant = 0.4;
  double velocity_defect = std::numeric_limits<double>::quiet_NaN();  // rescaled mode only
  std::optional<double> first_crossing_time;
};

// Time-indexed states with persistent vertex identity (unless remeshed[k] is set).
struct FlowTrajectory {
  TimeMode mode = TimeMode::Unrescaled;
  std::vector<double> times;
  std::vector<DiscreteCurve> states;
  std::vector<char> remeshed;
  RunMetadata meta;

  std::size_t size() const { return times.size(); }
};

// One time step from time t to t + dt. `reference_edge` is the initial mean edge length used by the
// collapse guard.
DiscreteCurve step_flow(const DiscreteCurve& state, double t, double dt, const FlowOptions& opts,
                        const FlowBoundary& boundary, double reference_edge);

// Uniform steps from t0 to t1 (dt is shrunk so the horizon is hit exactly); every state recorded
// when record_every == 1.
FlowTrajectory evolve(const DiscreteCurve& initial, double t0, double t1, double dt,
                      const FlowOptions& opts = {}, const FlowBoundary& boundary = {},
                      int record_every = 1);

// Trajectory sampled from a closed-form solution at the given times.
FlowTrajectory sample_trajectory(const std::function<DiscreteCurve(double)>& exact,
                                 const std::vector<double>& times);

FlowTrajectory static_trajectory(const DiscreteCurve& state, const std::vector<double>& times);

// D_lambda: (x, t) -> (lambda x, lambda^2 t).
DiscreteCurve scale_curve(const DiscreteCurve& c, double lambda);
FlowTrajectory parabolic_rescale(const FlowTrajectory& traj, double lambda);

// State at time t by linear interpolation between the bracketing recorded states.
DiscreteCurve interpolate_state(const FlowTrajectory& traj, double t);

// L_tau = e^{tau/2} M(-e^{-tau}) on a uniform tau grid [tau_begin, tau_end] with spacing dtau.
// Stores the worst rescaled normal-velocity defect |V - (H + x^perp / 2)| in meta.velocity_defect.
FlowTrajectory to_rescaled(const FlowTrajectory& traj, double tau_begin, double tau_end,
                           double dtau = 0.01);

// Per-state normal-velocity defect of a rescaled trajectory (centered differences in tau;
// 2-vertex collar at open ends excluded). Entries at the first and last state are NaN.
std::vector<double> rescaled_velocity_defect(const FlowTrajectory& rescaled);

// Resample every component uniformly in arclength, keeping the vertex count and open endpoints.
DiscreteCurve redistribute(const DiscreteCurve& c);

bool has_self_intersection(const DiscreteCurve& c);
std::optional<double> first_self_intersection(const FlowTrajectory& traj);

// Hausdorff distance between curve and a union of lines, both restricted to B_radius(0).
// Line points are sampled with the given spacing.
double hausdorff_to_lines(const DiscreteCurve& c, const std::vector<AffineLine>& lines,
                          double radius, double sample_step = 1e-3);

// ---------------------------------------------------------------------------------------------
// Products of factor flows in C^2.

using FactorTrack = std::variant<FlowTrajectory, AffineLine>;

struct ProductTrajectory {
  std::vector<double> times;
  FactorTrack first;
  FactorTrack second;

  ProductLagrangian state(std::size_t k) const;
};

// Pairs the factor evolutions; a static line contributes the same line at every time.
// `times` is only used when both factors are lines. Throws TimeGridMismatch.
ProductTrajectory product_evolve(const FactorTrack& a, const FactorTrack& b,
                                 const std::vector<double>& times = {});

ProductTrajectory parabolic_rescale(const ProductTrajectory& traj, double lambda);

}  // namespace lmcf
