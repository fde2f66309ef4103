#include "fem1d.hpp"

#include <Eigen/SparseCholesky>

namespace lmcf::fem1d {

Operators assemble(const Polyline& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Operators ops;
  ops.mass = VecX::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * p.edge_count());
  for (std::size_t e = 0; e < p.edge_count(); ++e) {
    const auto i = static_cast<Eigen::Index>(e);
    const auto j = static_cast<Eigen::Index>((e + 1) % p.size());
    const double l = p.edge_length(e);
    if (!(l > 0.0)) throw Error(ErrorCode::DegenerateEdge, "edge " + std::to_string(e));
    ops.mass[i] += 0.5 * l;
    ops.mass[j] += 0.5 * l;
    const double k = 1.0 / l;
    trip.emplace_back(i, i, k);
    trip.emplace_back(j, j, k);
    trip.emplace_back(i, j, -k);
    trip.emplace_back(j, i, -k);
  }
  ops.stiff.resize(n, n);
  ops.stiff.setFromTriplets(trip.begin(), trip.end());
  return ops;
}

MatX implicit_solve(const Operators& ops, double dt, const MatX& u_old,
                    const std::vector<char>& fixed, const MatX& u_fixed) {
  const Eigen::Index n = ops.mass.size();
  std::vector<Eigen::Index> free_index(n, -1);
  Eigen::Index nf = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!fixed[i]) free_index[i] = nf++;

  MatX out = u_old;
  for (Eigen::Index i = 0; i < n; ++i)
    if (fixed[i]) out.row(i) = u_fixed.row(i);
  if (nf == 0) return out;

  std::vector<Eigen::Triplet<double>> trip;
  MatX rhs(nf, u_old.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    if (!fixed[i]) {
      rhs.row(free_index[i]) = ops.mass[i] * u_old.row(i);
      trip.emplace_back(free_index[i], free_index[i], ops.mass[i]);
    }
  for (int k = 0; k < ops.stiff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ops.stiff, k); it; ++it) {
      const Eigen::Index r = it.row(), c = it.col();
      if (fixed[r]) continue;
      if (fixed[c])
        rhs.row(free_index[r]) -= dt * it.value() * u_fixed.row(c);
      else
        trip.emplace_back(free_index[r], free_index[c], dt * it.value());
    }
  Eigen::SparseMatrix<double> a(nf, nf);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::SolverFailure, "implicit system is not SPD");
  const MatX sol = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !sol.allFinite())
    throw Error(ErrorCode::SolverFailure, "implicit solve failed");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!fixed[i]) out.row(i) = sol.row(free_index[i]);
  return out;
}

MatX laplacian(const Operators& ops, const MatX& u) {
  MatX ku = ops.stiff * u;
  for (Eigen::Index i = 0; i < u.rows(); ++i) ku.row(i) /= -ops.mass[i];
  return ku;
}

}  // namespace lmcf::fem1d
