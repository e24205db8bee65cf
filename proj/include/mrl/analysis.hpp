#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "mrl/field.hpp"
#include "mrl/registration.hpp"
#include "mrl/wells.hpp"

namespace mrl {

struct EnergyBreakdown {
  double sigma_param = 1.0;  // varsigma in (0, 1]
  double p = 1.0;
  double q = 1.0;
  double first_term = 0.0;   // (1/vs) int d^p(Du, K)
  double second_term = 0.0;  // (1/vs) int vs^q |D^2 u|^q
  double total = 0.0;
  double epsilon = 0.0;  // vs^{1/p}
};

/// Midpoint-rule energy over node-centered cells of volume h^n; distances
/// from dist_to_family at each masked node.
EnergyBreakdown energy(const GridField& f, const Jacobians& jac, const WellFamily& K, double vs,
                       double p, double q);

struct MajorityPhase {
  int index = -1;
  GridSet u0;
  double alpha = 0.0;
  double perimeter = 0.0;
  double volume_fraction = 0.0;  // of U0 within the mask
  bool tie = false;              // balanced phases, broken to the smaller index
};

/// Level-set scan of J = d^s(Du, K) with s = 1 + p/q* over 64 geometric
/// thresholds in ((sigma/2)^s, sigma^s); keeps the threshold of minimal
/// discrete perimeter. Throws NoMajority when U0 covers less than half of
/// the masked volume.
MajorityPhase majority_phase(const GridField& f, const Jacobians& jac, const WellFamily& K,
                             double p, double q);

struct TruncationResult {
  GridField w;
  GridSet bad;          // E = mask minus {maximal function <= lambda}
  GridSet bad_dilated;  // E'
  double dw_sup = 0.0;  // sup of |Dw|_F over masked nodes
  double bad_volume = 0.0;
  double bad_dilated_perimeter = 0.0;
  double diff_lq = 0.0;            // |Du - Dw|_q^q over the mask
  double tail_lq = 0.0;            // int_{|Du| > lambda} |Du|^q
  double bad_dilated_volume = 0.0;
};

/// Lipschitz truncation by the discrete maximal function over dyadic radii
/// {h, 2h, 4h, ..., 2}: w = u where the maximal function is <= lambda, the
/// componentwise McShane envelope with slope sqrt(n) lambda elsewhere.
TruncationResult lipschitz_truncate(const GridField& f, const Jacobians& jac, double lambda,
                                    double q = 1.0);

/// Topological degree of the piecewise-affine interpolant on the Kuhn
/// triangulation of the region's cells. xi must clear the image of the
/// region boundary by 2 Lip(w) h.
int degree_at(const GridField& w, const GridSet& region, const Eigen::VectorXd& xi);

/// Region of all masked nodes.
GridSet full_region(const GridField& f);

/// Nodes where the map may fold: det Dw <= sigma. Complements the degree
/// machinery; outside this set preimages count with sign +1.
GridSet low_determinant_set(const GridField& f, const Jacobians& jac, double sigma);

struct PairStats {
  std::int64_t count = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double threshold = 0.0;  // C * epsilon
  std::array<double, 7> quantiles{};  // of s at {1,5,25,50,75,95,99}%
  std::array<double, 7> abs_quantiles{};  // of |s|
  double violating_fraction = 0.0;        // |s| > C * epsilon
};

/// s(x, y) = |u(y) - u(x)| - |A_{i*}(x - y)| over seeded uniform pairs in
/// B_radius, u by multilinear interpolation.
PairStats pair_statistics(const GridField& f, const WellFamily& K, int majority, double epsilon,
                          double C, std::int64_t n_pairs, std::uint64_t seed, double radius);

struct IbpResult {
  double lhs = 0.0;        // sum_i int d(Du, SO(n) A_1)
  double rhs = 0.0;        // c1 sum_i int d(Du, K) + c2 sum_i |v_i| |u(x_i) - l_R(x_i)|
  double margin = 0.0;     // rhs - lhs
  double identity_lhs = 0.0;  // sum_i int v_i^T (R - Du) tau_i
  double identity_rhs = 0.0;  // -sum_i v_i^T (l_R - u)(x_i)
  double alpha = 0.0;         // directional dominance margin
};

/// Simplex integration-by-parts check: segment quadrature of both sides of
/// the majorized inequality plus the exact boundary identity. Vertices and
/// the interior point must satisfy the directional dominance hypothesis.
IbpResult ibp_simplex_check(const GridField& f, const Jacobians& jac, const WellFamily& K,
                            int majority, const std::vector<Eigen::VectorXd>& vertices,
                            const Eigen::VectorXd& x, const AffineMap& l_R, double c1, double c2,
                            int quad_points = 256);

struct AffineFitReport {
  AffineMap map;
  double residual = 0.0;        // recovery residual on the simplex
  double inlier_fraction = 0.0;  // |u(y) - l(y)| <= C eps over sample points
  int attempts = 0;              // simplex seeds tried
};

/// Samples a well-spread simplex whose pairwise distortions stay under
/// C*eps, recovers the affine map against the majority well, and reports
/// the inlier fraction on 1e4 seeded points.
AffineFitReport affine_fit_report(const GridField& f, const WellFamily& K, int majority,
                                  double epsilon, double C, std::uint64_t seed);

/// Interior sample with all corner nodes masked; used by the analyses that
/// interpolate.
bool interpolatable(const GridField& f, const Eigen::VectorXd& x);

}  // namespace mrl
