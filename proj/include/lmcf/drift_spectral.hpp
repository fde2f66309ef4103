#pragma once

#include "lmcf/plane_pair.hpp"
#include "lmcf/polynomial.hpp"

#include <string>
#include <vector>

namespace lmcf {

// L0 f = Delta f - 1/2 <x, grad f>, exact on polynomials.
Polynomial drift_apply(const Polynomial& f);

// Hermite element for multi-index k, scaled to integer coefficients:
// h_k(x) = prod_i 2^{k_i/2} He_{k_i}(x_i / sqrt 2), so L0 h_k = -(|k|/2) h_k (e.g. h_2 = x^2 - 2).
Polynomial hermite(const std::vector<int>& k);
// All multi-indices of length n with |k| == degree, in lexicographic order.
std::vector<std::vector<int>> multi_indices(int n, int degree);
// Closed form of the weighted square norm int h_k^2 e^{-|x|^2/4} dx.
double hermite_norm_squared(const std::vector<int>& k);

// ---------------------------------------------------------------------------------------------
// Numeric path: uniform tensor grid on [-half_width, half_width]^n, spacing h, row-major with the
// first coordinate slowest.

struct GridFunction {
  int n = 1;
  double half_width = 0.0;
  double h = 0.0;
  int points = 0;  // per axis
  VecX values;

  double coordinate(int index) const { return -half_width + h * index; }
};

GridFunction sample_grid(const Polynomial& f, double half_width, double h);

// 7-point (sixth order) finite-difference drift Laplacian on the grid nodes within the cube of
// half width eval_radius. Nodes outside that cube are set to NaN. Throws BoundaryTooTight when a
// stencil would leave the grid.
GridFunction drift_apply_grid(const GridFunction& f, double eval_radius);

// Relative weighted residual |L0 f + lambda f|_w / |f|_w on the evaluated nodes (grid quadrature
// with weight e^{-|x|^2/4}).
double grid_eigen_residual(const GridFunction& f, const GridFunction& l0f, double lambda);

// ---------------------------------------------------------------------------------------------
// Weighted norms |f|^2 = int f^2 e^{-|x|^2/4} dx by tensor Gauss-Hermite quadrature.

struct GaussHermite {
  std::vector<double> nodes;    // in x (already scaled by 2)
  std::vector<double> weights;  // include the factor 2 of dx = 2 dy
};

// Golub-Welsch rule with `count` nodes for the weight e^{-x^2/4} on R.
const GaussHermite& gauss_hermite(int count = 64);

double weighted_inner(const Polynomial& f, const Polynomial& g, int nodes = 64);
double weighted_norm(const Polynomial& f, int nodes = 64);

// u(x, tau) = sum e^{-lambda_i tau} h_i(x).
struct HomogeneousTerm {
  Polynomial h;
  double lambda = 0.0;
};

struct DriftSolution {
  int n = 1;
  std::vector<HomogeneousTerm> terms;
  int growth_degree = 8;

  static DriftSolution homogeneous(const Polynomial& h, double lambda);
  Polynomial at(double tau) const;
  // Merge terms with equal lambda and drop zero polynomials.
  void normalize();
};

// Throws GrowthUnbounded when a term's degree exceeds growth_degree. A single declared-homogeneous
// term is evaluated as e^{-lambda tau} |h|.
double weighted_norm(const DriftSolution& u, double tau);
// Residual of the drift heat equation d_tau u = L0 u, checked symbolically: max coefficient of
// L0 h_i + lambda_i h_i over the terms.
double drift_heat_residual(const DriftSolution& u);

// Pair function data on P_1, P_2 in intrinsic plane coordinates.
struct PairSolution {
  DriftSolution u[2];
};

double weighted_inner(const PairSolution& a, const PairSolution& b, double tau);
double weighted_norm(const PairSolution& u, double tau);

struct BasisElement {
  std::string label;
  PairSolution u;
};

struct HomogeneousBasis {
  int degree = 0;
  std::vector<BasisElement> elements;
  MatX gram;  // tau = 0 inner products
  int rank = 0;
};

// Degree-0 and degree-1 homogeneous pair solutions of a plane pair with intersection dimension
// m in {0, 1}: degree 0 is {1, theta}; degree 1 is {x_1..x_{2n-2}, z, z theta} for m = 1 and the
// 2n ambient coordinates for m = 0. Throws EqualAngles when theta_bar_1 == theta_bar_2.
HomogeneousBasis homogeneous_basis(const PlanePairConfig& config, int degree);
// Single plane R^n: the Hermite elements of the given degree.
HomogeneousBasis homogeneous_basis_single_plane(int n, int degree);

struct Projection {
  PairSolution result;              // u - f
  std::vector<double> coefficients;  // f = sum c_i V_i
  double gram_condition = 0.0;
};

// Orthogonal projection at tau onto the complement of span V. Throws IllConditionedGram when the
// Gram condition number is 1e8 or larger.
Projection project_out(const PairSolution& u, const std::vector<PairSolution>& V, double tau);

// ---------------------------------------------------------------------------------------------

struct NormSequence {
  std::vector<double> tau;
  std::vector<double> log_norm;  // log |u|_tau
};

NormSequence norm_sequence(const DriftSolution& u, const std::vector<double>& taus);
NormSequence norm_sequence(const PairSolution& u, const std::vector<double>& taus);

enum class AnnulusVerdict { Growing, Decaying, Violation };
const char* verdict_name(AnnulusVerdict v);

struct AnnulusReport {
  double s = 0.0;
  std::vector<double> T;          // T = -tau of the later norm in each ratio
  std::vector<char> growth;       // |u|_{-T-1} >= e^{s/2} |u|_{-T}
  std::vector<double> log_ratio;  // log |u|_{-T-1} - log |u|_{-T}
  std::vector<double> violations;  // T where growth holds at T but not at T + 1
  AnnulusVerdict verdict = AnnulusVerdict::Decaying;
  // Smallest T from which the per-T verdicts agree with the overall verdict.
  double earliest_consistent_T = 0.0;
};

// Requires consecutive integer tau and non-integer s (InvalidArgument otherwise).
AnnulusReport three_annulus_classify(const NormSequence& seq, double s);

struct FrequencyReport {
  std::vector<double> second_differences;  // of log |u|^2
  bool homogeneous = false;
  bool convex = false;  // all second differences >= -1e-8
  double degree = 0.0;  // -slope of log |u|^2 per unit tau
};

// Requires at least 3 uniformly spaced points.
FrequencyReport frequency_audit(const NormSequence& seq);

}  // namespace lmcf
