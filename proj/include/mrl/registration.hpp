#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mrl/error.hpp"

namespace mrl {

struct AffineMap {
  Eigen::MatrixXd O;  // gradient, lands in O(n)A by construction
  Eigen::VectorXd t;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return O * x + t; }
};

/// Simplex correspondence for affine recovery from approximate pairwise
/// distances: n+1 source points in the unit ball, their images, and the
/// reference matrix A. The inradius b of conv(z) is certified on
/// construction by the inscribed-ball solve on the simplex facets.
struct PointCorrespondence {
  int n = 0;
  std::vector<Eigen::VectorXd> z;
  std::vector<Eigen::VectorXd> zeta;
  Eigen::MatrixXd A;
  double b = 0.0;                // inradius of conv(z)
  Eigen::VectorXd incenter;

  PointCorrespondence(int n, std::vector<Eigen::VectorXd> z, std::vector<Eigen::VectorXd> zeta,
                      Eigen::MatrixXd A);

  /// max over pairs of | |zeta_i - zeta_j| - |A (z_i - z_j)| |
  double distortion() const;
};

/// Inradius and incenter of the simplex conv(points): all facet constraints
/// active at the Chebyshev center. Throws DegenerateSimplex when the facet
/// system is singular or the inradius is not positive.
std::pair<double, Eigen::VectorXd> simplex_inscribed_ball(const std::vector<Eigen::VectorXd>& points);

struct RecoveredMap {
  AffineMap map;
  double residual = 0.0;  // max_i |zeta_i - map(z_i)|
};

/// Affine recovery with orthogonal gradient: translate z_0 / zeta_0 to the
/// origin, premultiply sources by A, solve the linear system for the raw
/// map, Gram-Schmidt its frame into an orthogonal one, compose back.
RecoveredMap recover_orthogonal_affine(const PointCorrespondence& pc);

/// Residual of one extra correspondence under an already recovered map.
double extend_to_point(const AffineMap& map, const Eigen::VectorXd& z, const Eigen::VectorXd& zeta);

struct PolarBoundCheck {
  double radius = 0.0;  // n / b
  int samples = 0;      // feasible points tested
  double max_norm = 0.0;
  bool ok = false;      // every feasible sample satisfied |x| <= n/b + 1e-9
};

/// Polar-set bound for a simplex containing B_b (centered at the origin):
/// S = {x : x . z_i <= 1 for all i} lies in the ball of radius n/b. Checks
/// the bound on seeded rejection samples from B_{2n/b}.
PolarBoundCheck polar_radius_bound(const std::vector<Eigen::VectorXd>& z, double b,
                                   std::uint64_t seed = 0, int n_samples = 10000);

/// Coefficients gamma with sum gamma_i z_i = v (v unit) and |gamma_i| <= 2/b
/// when conv(z_0..z_n) contains B_b(y); z_0 is used as the base point.
Eigen::VectorXd barycentric_coefficients(const std::vector<Eigen::VectorXd>& z,
                                         const Eigen::VectorXd& v);

}  // namespace mrl
