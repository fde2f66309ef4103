#pragma once

#include "lmcf/error.hpp"
#include "lmcf/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace lmcf {

// Oriented Lagrangian plane in C^n = R^{2n} (interleaved coordinates x1, y1, ..., xn, yn).
struct OrientedPlane {
  MatX basis;              // 2n x n, orthonormal oriented columns
  double angle = 0.0;      // Lagrangian angle theta_bar
  double beta_bar = 0.0;   // constant value of the Liouville primitive on the plane
};

// e_z spans the intersection line, e_w = J e_z. transverse[k] is the covector of x_{k+1}:
// x_1..x_{n-1} vanish on P_2, x_n..x_{2n-2} vanish on P_1, all vanish on e_z and e_w.
struct CoordinateFrame {
  VecX e_z;
  VecX e_w;
  std::vector<VecX> transverse;
};

struct PlanePairConfig {
  int n = 2;
  int intersection_dim = 1;
  std::array<OrientedPlane, 2> planes;
  CoordinateFrame frame;  // e_z/e_w empty unless intersection_dim == 1
  MatX ambient;           // unitary 2n x 2n frame applied to the standard model

  // Point of P_j with intrinsic coordinates y (length n).
  VecX point(int j, const VecX& y) const { return planes[j].basis * y; }
  double z(const VecX& x) const { return frame.e_z.dot(x); }
  double w(const VecX& x) const { return frame.e_w.dot(x); }
};

// Standard model P_j = R^m x e^{i theta_j/(n-m)} R^{n-m}, then mapped by the ambient frame.
// The frame must be orthonormal within 1e-12 and commute with J (unitary), else BadFrame.
// Requires 0 <= m < n.
PlanePairConfig make_plane_pair(int n, double theta1, double theta2, int intersection_dim,
                                const MatX& frame = MatX());

// Orientation-aware Lagrangian angle of an oriented n-plane spanned by the columns of `basis`:
// arg det_C of the n x n complex matrix with columns (x_k + i y_k).
double plane_angle(const MatX& basis);

MatX j_matrix(int n);

std::string plane_pair_to_json(const PlanePairConfig& config);
PlanePairConfig plane_pair_from_json(const std::string& text);

}  // namespace lmcf
