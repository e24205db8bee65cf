#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mrl/error.hpp"

namespace mrl {

// Dense small-matrix kernel shared by every other module. Dimensions 2..4,
// all real, all double precision. Matrices are plain Eigen types; free
// functions keep the call sites expression-friendly.

struct SymEigen {
  Eigen::VectorXd eigenvalues;   // sorted descending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, matching order
};

struct PolarFactors {
  Eigen::MatrixXd Q;  // orthogonal
  Eigen::MatrixXd S;  // symmetric positive semidefinite, M = Q * S
};

struct WellProjection {
  double distance = 0.0;
  Eigen::MatrixXd nearest;  // Q* A with Q* in SO(n)
};

struct FamilyProjection {
  double distance = 0.0;
  int well_index = -1;
  Eigen::MatrixXd nearest;
};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
/// Throws NonSymmetric when the relative asymmetry exceeds 1e-12.
SymEigen sym_eigen(const Eigen::MatrixXd& S);

/// M = Q S with Q orthogonal and S = sqrt(M^T M). Singular M allowed.
PolarFactors polar_decompose(const Eigen::MatrixXd& M);

/// Distance from M to the rotation orbit SO(n)A, with the nearest orbit
/// point. SVD of M A^T with the smallest singular value sign-flipped when
/// det(M A^T) < 0, so the projection lands in SO(n), not O(n).
WellProjection dist_to_well(const Eigen::MatrixXd& M, const Eigen::MatrixXd& A);

class WellFamily;  // defined in wells.hpp

/// Distance to K = union of the family's orbits; ties broken by smallest
/// well index.
FamilyProjection dist_to_family(const Eigen::MatrixXd& M, const WellFamily& K);

/// Orthonormal basis of the joint orthogonal complement of the inputs.
/// Rank is decided at 1e-10 relative to the largest singular value. Columns
/// of the result span the complement; zero columns never appear.
Eigen::MatrixXd nullspace(const std::vector<Eigen::VectorXd>& vectors, int n);

/// Rotation maximizing tr(Q^T M) over SO(n) (the Procrustes projection of M).
Eigen::MatrixXd nearest_rotation(const Eigen::MatrixXd& M);

inline double frob(const Eigen::MatrixXd& M) { return M.norm(); }

}  // namespace mrl
