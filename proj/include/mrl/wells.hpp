#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mrl/error.hpp"
#include "mrl/linalg.hpp"

namespace mrl {

/// K = union of rotation orbits SO(n)A_i. Immutable after construction;
/// sigma is the separation margin computed once by sigma_margin().
class WellFamily {
public:
  WellFamily(int n, std::vector<Eigen::MatrixXd> wells);

  int dim() const { return n_; }
  int size() const { return static_cast<int>(wells_.size()); }
  const Eigen::MatrixXd& well(int i) const { return wells_[i]; }
  const std::vector<Eigen::MatrixXd>& wells() const { return wells_; }
  double sigma() const { return sigma_; }

private:
  int n_;
  std::vector<Eigen::MatrixXd> wells_;
  double sigma_;
};

/// sigma <= 1 with sigma < (1/4) min pairwise orbit distance, and small
/// enough that any M with det M < sigma stays at distance > sigma from K
/// (via the determinant Lipschitz bound L_i = n (|A_i|_F + 1)^{n-1}).
double sigma_margin(int n, const std::vector<Eigen::MatrixXd>& wells);

struct Rank1Vectors {
  Eigen::VectorXd p;  // positive part:  S = p p^T - q q^T
  Eigen::VectorXd q;
  bool zero() const { return p.norm() == 0.0 && q.norm() == 0.0; }
};

struct Rank1Witness {
  Eigen::MatrixXd X;  // in SO(n)A
  Eigen::MatrixXd Y;  // in SO(n)B, X - Y = a b^T
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

struct Rank1Connection {
  int i = 0, j = 0;
  Rank1Vectors vectors;
  Rank1Witness witness;
};

struct Direction {
  Eigen::VectorXd v;
  double margin = 0.0;  // +infinity for a family with no competitor
};

struct CompatibilityReport {
  int n = 0;
  int m = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<Rank1Connection> edges;
  bool connected = false;
  std::vector<std::pair<int, int>> spanning_tree;  // oriented, BFS from vertex 0
  std::optional<bool> generic;                     // only when m <= n and connected
  std::vector<std::optional<Direction>> directions_h1;
  std::vector<std::optional<Direction>> directions_h2;
  std::vector<std::optional<Direction>> constructive;  // from separating_directions
  std::optional<bool> dichotomy_ok;                    // m = 2 only
};

/// Detects a rank-1 connection between the positive wells SO(n)A and
/// SO(n)B: S = A^T A - B^T B must have at most one significantly positive
/// and one significantly negative eigenvalue. Returns the orthogonal (p, q)
/// with S = p p^T - q q^T, the zero pair for identical wells, nullopt when
/// the wells are incompatible.
std::optional<Rank1Vectors> rank1_connect(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Explicit matrices X in SO(n)A, Y in SO(n)B with X - Y = a b^T. Requires a
/// nonzero connection.
Rank1Witness rank1_witness(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

enum class Hypothesis { H1, H2 };

/// Margin of the separation hypothesis at a given direction:
///   H1: min_{j != i} (|A_i v|^2 - |A_j v|^2)
///   H2: min_{j != i} (|v^T A_i^{-1}|^2 - |v^T A_j^{-1}|^2)
double evaluate_hypothesis(const WellFamily& K, int i, Hypothesis which, const Eigen::VectorXd& v);

struct SearchOptions {
  std::uint64_t seed = 0;
  int n_samples = 20000;
  int refine_steps = 200;
};

/// Heuristic maximizer for the hypothesis margin: seeded sphere samples,
/// then projected-gradient ascent with step halving on the best candidate.
/// Absence of a certificate never means the hypothesis is false.
std::optional<Direction> verify_hypothesis(const WellFamily& K, int i, Hypothesis which,
                                           const SearchOptions& opts = {});

/// Exact two-well test: largest eigenvalue of the difference quadratic form,
/// with its eigenvector. Positive value <=> the hypothesis holds for i
/// against j.  Used as the fast path when m = 2.
Direction pair_hypothesis_exact(const WellFamily& K, int i, int j, Hypothesis which);

struct OrientedTree {
  // edge k connects (i_k, j_k), oriented i_k -> j_k, with the detector's
  // (p_k, q_k) for that orientation
  std::vector<std::pair<int, int>> edges;
  std::vector<Rank1Vectors> vectors;
};

/// Constructive direction finding over a generic spanning tree: for each
/// well, orients the tree away from it, annihilates the q-side vectors and
/// certifies a strictly positive H1 margin.
std::vector<std::optional<Direction>> separating_directions(const WellFamily& K,
                                                            const OrientedTree& tree);

/// Genericity of the tree's connection vectors: every n-subset of the
/// nonzero {p_k, q_k} has full rank.
bool generic_vectors(const OrientedTree& tree, int n);

/// Full pairwise analysis: edges, connectivity, spanning tree, genericity,
/// directions (constructive and searched), m = 2 dichotomy.
CompatibilityReport compatibility_report(const WellFamily& K, std::uint64_t seed);

struct MajorizationPair {
  Eigen::VectorXd tau;  // unit segment direction
  Eigen::VectorXd v;    // weight vector of the linear functional
};

struct MajorizationConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Smallest (c1, c2) on the grid {2^k} such that
///   d(M, SO(n)A_i) <= c1 d(M, K) + c2 v^T (R - M) tau
/// holds for every (tau, v) pair on 1e5 seeded samples of M drawn from
/// tubular neighborhoods of all wells plus Gaussian background. An empirical
/// certificate, not a proof.
MajorizationConstants majorization_constants(const WellFamily& K, int i,
                                             const std::vector<MajorizationPair>& pairs,
                                             const Eigen::MatrixXd& R, std::uint64_t seed,
                                             int n_samples = 100000);

inline MajorizationConstants majorization_constants(const WellFamily& K, int i,
                                                    const Eigen::VectorXd& tau,
                                                    const Eigen::VectorXd& v,
                                                    const Eigen::MatrixXd& R, std::uint64_t seed,
                                                    int n_samples = 100000) {
  return majorization_constants(K, i, {{tau, v}}, R, seed, n_samples);
}

}  // namespace mrl
