#include "lmcf/plane_pair.hpp"

#include <json.hpp>

#include <Eigen/LU>

#include <complex>

namespace lmcf {

MatX j_matrix(int n) {
  MatX j = MatX::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    j(2 * k, 2 * k + 1) = -1.0;
    j(2 * k + 1, 2 * k) = 1.0;
  }
  return j;
}

double plane_angle(const MatX& basis) {
  const int n = static_cast<int>(basis.cols());
  Eigen::MatrixXcd m(n, n);
  for (int c = 0; c < n; ++c)
    for (int k = 0; k < n; ++k) m(k, c) = {basis(2 * k, c), basis(2 * k + 1, c)};
  return std::arg(m.determinant());
}

PlanePairConfig make_plane_pair(int n, double theta1, double theta2, int m, const MatX& frame) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (m < 0 || m >= n)
    throw Error(ErrorCode::InvalidArgument, "intersection_dim must satisfy 0 <= m < n");
  const int dim = 2 * n;
  MatX u = frame.size() == 0 ? MatX::Identity(dim, dim) : frame;
  if (u.rows() != dim || u.cols() != dim) throw Error(ErrorCode::BadFrame, "frame has wrong shape");
  if ((u.transpose() * u - MatX::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorCode::BadFrame, "frame is not orthonormal within 1e-12");
  const MatX j = j_matrix(n);
  if ((u * j - j * u).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorCode::BadFrame, "frame does not commute with J");
  // A unitary frame shifts every Lagrangian angle by arg det_C; only SU(n) keeps the labels.
  MatX real_columns(dim, n);
  for (int k = 0; k < n; ++k) real_columns.col(k) = u.col(2 * k);
  if (std::abs(wrap_angle(plane_angle(real_columns))) > 1e-12)
    throw Error(ErrorCode::BadFrame, "frame has nontrivial complex determinant");

  PlanePairConfig cfg;
  cfg.n = n;
  cfg.intersection_dim = m;
  cfg.ambient = u;
  const double angles[2] = {theta1, theta2};
  MatX rotated[2];  // directions of e^{i phi_j} R^{n-m} before the ambient frame
  for (int p = 0; p < 2; ++p) {
    const double phi = angles[p] / (n - m);
    MatX b = MatX::Zero(dim, n);
    for (int k = 0; k < m; ++k) b(2 * k, k) = 1.0;
    for (int k = m; k < n; ++k) {
      b(2 * k, k) = std::cos(phi);
      b(2 * k + 1, k) = std::sin(phi);
    }
    rotated[p] = b.rightCols(n - m);
    cfg.planes[p].basis = u * b;
    cfg.planes[p].angle = angles[p];
  }
  if (m == 1) {
    VecX ez = VecX::Zero(dim);
    ez[0] = 1.0;
    cfg.frame.e_z = u * ez;
    cfg.frame.e_w = j * cfg.frame.e_z;
    for (int p : {1, 0})
      for (int c = 0; c < n - 1; ++c) cfg.frame.transverse.push_back(u * (j * rotated[p].col(c)));
  }
  return cfg;
}

std::string plane_pair_to_json(const PlanePairConfig& c) {
  using nlohmann::json;
  auto mat = [](const MatX& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(r, k));
      rows.push_back(row);
    }
    return rows;
  };
  json j;
  j["format"] = "lmcf-plane-pair";
  j["version"] = 1;
  j["n"] = c.n;
  j["intersection_dim"] = c.intersection_dim;
  j["frame"] = mat(c.ambient);
  for (int p = 0; p < 2; ++p) {
    json pl;
    pl["angle"] = c.planes[p].angle;
    pl["beta_bar"] = c.planes[p].beta_bar;
    pl["basis"] = mat(c.planes[p].basis);
    j["planes"].push_back(pl);
  }
  return j.dump(2);
}

PlanePairConfig plane_pair_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, e.what());
  }
  if (j.value("format", "") != "lmcf-plane-pair")
    throw Error(ErrorCode::IoError, "not a plane-pair document");
  const int n = j.at("n");
  MatX frame(2 * n, 2 * n);
  for (int r = 0; r < 2 * n; ++r)
    for (int k = 0; k < 2 * n; ++k) frame(r, k) = j.at("frame").at(r).at(k).get<double>();
  PlanePairConfig c = make_plane_pair(n, j.at("planes").at(0).at("angle"),
                                      j.at("planes").at(1).at("angle"),
                                      j.at("intersection_dim"), frame);
  for (int p = 0; p < 2; ++p) c.planes[p].beta_bar = j.at("planes").at(p).value("beta_bar", 0.0);
  return c;
}

}  // namespace lmcf
