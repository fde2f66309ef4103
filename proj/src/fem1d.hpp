#pragma once

// P1 finite elements on a single polyline component: lumped mass, stiffness and the implicit
// solve (M + dt K) u = M u_old with Dirichlet nodes eliminated.

#include "lmcf/geometry.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace lmcf::fem1d {

struct Operators {
  VecX mass;                         // lumped (dual lengths)
  Eigen::SparseMatrix<double> stiff; // sum over edges of (u_i - u_j)^2 / l
};

Operators assemble(const Polyline& p);

// Solves (M + dt K) u = M u_old + rhs_extra for free nodes; nodes with fixed[i] keep u_fixed[i].
// Columns of u_old are solved independently with the same factorization.
MatX implicit_solve(const Operators& ops, double dt, const MatX& u_old,
                    const std::vector<char>& fixed, const MatX& u_fixed);

// Discrete Laplacian -(M^{-1} K) u applied per column.
MatX laplacian(const Operators& ops, const MatX& u);

}  // namespace lmcf::fem1d
