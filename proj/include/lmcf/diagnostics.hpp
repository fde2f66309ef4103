#pragma once

#include "lmcf/flow.hpp"
#include "lmcf/geometry.hpp"
#include "lmcf/plane_pair.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lmcf {

// Backwards heat kernel rho_{x0,t0}(x, t) = (4 pi (t0 - t))^{-n/2} exp(-|x - x0|^2 / (4 (t0 - t))),
// n the dimension of the Lagrangian. x0 has 2 entries for curves and 4 for products.
struct GaussianWindow {
  VecX x0;
  double t0 = 0.0;
};

// |x - x0| beyond which rho < 1e-16 * peak: sqrt(4 s ln 1e16), s = t0 - t.
double truncation_radius(double s);

// Factor integral of (4 pi s)^{-1/2} exp(-|x - a|^2 / 4s) (times an optional per-vertex weight,
// linearly interpolated along edges) by composite Gauss-Legendre on each edge.
double factor_gaussian_integral(const DiscreteCurve& c, const Vec2& a, double s,
                                const ScalarField* weight = nullptr);
double factor_gaussian_integral(const AffineLine& l, const Vec2& a, double s);
double factor_gaussian_integral(const Factor& f, const Vec2& a, double s);

// Throws WindowInPast unless t < t0.
double gaussian_density_ratio(const DiscreteCurve& state, double t, const GaussianWindow& w);
double gaussian_density_ratio(const ProductLagrangian& state, double t, const GaussianWindow& w);
// Union of product pieces (e.g. a plane pair written as two products of lines).
double gaussian_density_ratio(const std::vector<ProductLagrangian>& pieces, double t,
                              const GaussianWindow& w);

struct EntropyResult {
  double value = 0.0;
  VecX center;
  double scale = 0.0;  // s = t0 - t of the maximizing kernel
  int evaluations = 0;
};

struct EntropyOptions {
  std::uint64_t seed = 1;
  int max_centers = 64;
  int random_centers = 16;
  int scale_grid = 41;
};

// Sup over (x0, s) of the Gaussian integral; multi-start over vertices, centroids, crossing points
// and seeded perturbations, log-spaced s with golden-section refinement, then local center search.
EntropyResult entropy(const DiscreteCurve& c, const EntropyOptions& opts = {});
EntropyResult entropy(const ProductLagrangian& L, const EntropyOptions& opts = {});

// ---------------------------------------------------------------------------------------------

struct MonotonicityOptions {
  double value_tolerance = 1e-8;      // relative, per step
  double dissipation_tolerance = 0.02;
  double growth_limit = 1e6;          // polynomial growth constant accepted for f
};

struct MonotonicityReport {
  std::vector<double> times;
  std::vector<double> values;       // int f rho
  std::vector<double> dissipation;  // int f |H + (x - x0)^perp / (2 (t0 - t))|^2 rho
  std::vector<double> source;       // int (d_t - Delta) f rho
  std::vector<double> bound;        // allowed increment per step (first entry 0)
  std::vector<char> step_pass;
  bool pass = true;
  double max_violation = 0.0;       // worst (increment - allowed) / |value|
  // Worst |decrement - integrated dissipation| / integrated dissipation over steps whose
  // dissipation rate exceeds 1e-3 |value|; NaN if no such step.
  double dissipation_mismatch = 0.0;
  double growth_constant = 0.0;
};

// f on each recorded state (nullopt: f = 1); residual (d_t - Delta) f per state (nullopt: 0).
MonotonicityReport monotonicity_audit(const FlowTrajectory& traj, const GaussianWindow& w,
                                      const std::vector<ScalarField>* f = nullptr,
                                      const std::vector<ScalarField>* heat_residual = nullptr,
                                      const MonotonicityOptions& opts = {});
// Products: f = 1 (Huisken) or a separable f = f1 * f2 given per factor vertex.
MonotonicityReport monotonicity_audit(const ProductTrajectory& traj, const GaussianWindow& w,
                                      const MonotonicityOptions& opts = {});

// C = max |f| / (1 + |x|^d) over the sampled vertices.
double polynomial_growth_constant(const DiscreteCurve& c, const ScalarField& f, int degree);

// ---------------------------------------------------------------------------------------------

struct TranslatorFit {
  int component = 0;
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;        // arclength-weighted RMS of w - a - b theta (collar excluded)
  double rms_w = 0.0;           // arclength-weighted RMS of w
  bool degenerate = false;      // theta constant but w not: b undefined
  double kappa_measured = 0.0;  // least-squares kappa in H = kappa e_z^perp
  double velocity_residual = 0.0;  // RMS |H + b^{-1} e_z^perp| (theta + kappa w = c, kappa = -1/b)
};

// Per component of a planar curve with e_z, e_w in R^2 (e_w = J e_z).
std::vector<TranslatorFit> translator_fit(const DiscreteCurve& c, const Vec2& e_z);
// Product with an affine line: w and theta read on the product; frame vectors in R^4.
std::vector<TranslatorFit> translator_fit(const ProductLagrangian& L, const CoordinateFrame& frame);

}  // namespace lmcf
