#include "mrl/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "mrl/wells.hpp"

namespace mrl {

SymEigen sym_eigen(const Eigen::MatrixXd& S) {
  const double asym = (S - S.transpose()).norm();
  if (asym > 1e-12 * (1.0 + S.norm()))
    throw Error(ErrorCode::NonSymmetric, "sym_eigen: matrix is not symmetric");

  Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  const int n = static_cast<int>(S.rows());

  SymEigen out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors.resize(n, n);
  for (int k = 0; k < n; ++k)
    out.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  return out;
}

PolarFactors polar_decompose(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PolarFactors out;
  out.Q = svd.matrixU() * svd.matrixV().transpose();
  out.S = svd.matrixV() * svd.singularValues().asDiagonal() * svd.matrixV().transpose();
  return out;
}

Eigen::MatrixXd nearest_rotation(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(n);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) signs[n - 1] = -1.0;
  return svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
}

WellProjection dist_to_well(const Eigen::MatrixXd& M, const Eigen::MatrixXd& A) {
  if (std::abs(A.determinant()) <= 1e-12)
    throw Error(ErrorCode::SingularWell, "dist_to_well: well matrix is singular");

  WellProjection out;
  Eigen::MatrixXd q = nearest_rotation(M * A.transpose());
  out.nearest = q * A;
  out.distance = (M - out.nearest).norm();
  return out;
}

FamilyProjection dist_to_family(const Eigen::MatrixXd& M, const WellFamily& K) {
  if (K.size() == 0)
    throw Error(ErrorCode::EmptyFamily, "dist_to_family: no wells");

  FamilyProjection out;
  for (int i = 0; i < K.size(); ++i) {
    WellProjection p = dist_to_well(M, K.well(i));
    if (out.well_index < 0 || p.distance < out.distance) {
      out.distance = p.distance;
      out.well_index = i;
      out.nearest = p.nearest;
    }
  }
  return out;
}

Eigen::MatrixXd nullspace(const std::vector<Eigen::VectorXd>& vectors, int n) {
  if (vectors.empty()) return Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd rows(static_cast<int>(vectors.size()), n);
  for (int i = 0; i < static_cast<int>(vectors.size()); ++i) rows.row(i) = vectors[i].transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  const double thresh = 1e-10 * smax;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > thresh) ++rank;

  return svd.matrixV().rightCols(n - rank);
}

}  // namespace mrl
