#include "mrl/wells.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrl/rng.hpp"

namespace mrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_well(const Eigen::MatrixXd& A, const char* who) {
  if (A.determinant() <= 1e-12)
    throw Error(ErrorCode::NonPositiveWell,
                std::string(who) + ": well determinant must be positive");
}

}  // namespace

WellFamily::WellFamily(int n, std::vector<Eigen::MatrixXd> wells)
    : n_(n), wells_(std::move(wells)) {
  if (n_ < 2 || n_ > 4)
    throw Error(ErrorCode::BadParams, "WellFamily: dimension must be in 2..4");
  if (wells_.empty())
    throw Error(ErrorCode::EmptyFamily, "WellFamily: no wells");
  for (const auto& A : wells_) {
    if (A.rows() != n_ || A.cols() != n_)
      throw Error(ErrorCode::BadParams, "WellFamily: well size does not match dimension");
    if (!A.allFinite())
      throw Error(ErrorCode::BadParams, "WellFamily: well entries must be finite");
    if (std::abs(A.determinant()) <= 1e-12)
      throw Error(ErrorCode::SingularWell, "WellFamily: well determinant too small");
  }
  sigma_ = sigma_margin(n_, wells_);
}

double sigma_margin(int n, const std::vector<Eigen::MatrixXd>& wells) {
  double sigma = 1.0;
  for (std::size_t i = 0; i < wells.size(); ++i)
    for (std::size_t j = i + 1; j < wells.size(); ++j)
      sigma = std::min(sigma, 0.25 * dist_to_well(wells[i], wells[j]).distance);
  for (const auto& A : wells) {
    const double lip = n * std::pow(A.norm() + 1.0, n - 1);
    sigma = std::min(sigma, std::abs(A.determinant()) / (1.0 + lip));
  }
  return sigma;
}

std::optional<Rank1Vectors> rank1_connect(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  require_positive_well(A, "rank1_connect");
  require_positive_well(B, "rank1_connect");

  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd S = A.transpose() * A - B.transpose() * B;
  const double tol = 1e-9 * (1.0 + S.norm());
  SymEigen se = sym_eigen(S);
  const Eigen::VectorXd& lam = se.eigenvalues;

  if (S.norm() <= tol) {
    Rank1Vectors zero;
    zero.p = Eigen::VectorXd::Zero(n);
    zero.q = Eigen::VectorXd::Zero(n);
    return zero;
  }
  // at most one significantly positive and one significantly negative eigenvalue
  if (lam[1] > tol || lam[n - 2] < -tol) return std::nullopt;

  Rank1Vectors out;
  out.p = lam[0] > tol ? Eigen::VectorXd(std::sqrt(lam[0]) * se.eigenvectors.col(0))
                       : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
  out.q = lam[n - 1] < -tol ? Eigen::VectorXd(std::sqrt(-lam[n - 1]) * se.eigenvectors.col(n - 1))
                            : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
  return out;
}

Rank1Witness rank1_witness(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  auto conn = rank1_connect(A, B);
  if (!conn || conn->zero())
    throw Error(ErrorCode::NotConnected, "rank1_witness: wells are not rank-1 connected");

  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd Atil = A * B.inverse();
  SymEigen se = sym_eigen(Atil.transpose() * Atil);

  // slots 1,2 carry the nonunit eigenvalues (largest and smallest), the rest are 1
  const double mu1 = std::sqrt(std::max(se.eigenvalues[0], 0.0));
  const double mu2 = std::sqrt(std::max(se.eigenvalues[n - 1], 0.0));
  if (std::abs(mu1 - mu2) < 1e-10)
    throw Error(ErrorCode::DegenerateSpectrum, "rank1_witness: mu1 == mu2 with nonzero connection");

  Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd vk = se.eigenvectors.col(k);
    a0 += std::sqrt(std::max(se.eigenvalues[k], 0.0)) * vk * vk.transpose();
  }

  const double denom = mu2 * mu2 - mu1 * mu1;
  const double c1 = std::sqrt(std::max((mu2 * mu2 - 1.0) / denom, 0.0));
  const double c2 = std::sqrt(std::max((1.0 - mu1 * mu1) / denom, 0.0));

  Eigen::MatrixXd frame_w(n, n - 1), frame_z(n, n - 1);
  frame_w.col(0) = c1 * se.eigenvectors.col(0) + c2 * se.eigenvectors.col(n - 1);
  frame_z.col(0) = a0 * frame_w.col(0);
  for (int i = 1; i < n - 1; ++i) {
    frame_w.col(i) = se.eigenvectors.col(i);
    frame_z.col(i) = a0 * frame_w.col(i);
  }

  auto complete = [n](const Eigen::MatrixXd& cols) {
    std::vector<Eigen::VectorXd> vs;
    for (int c = 0; c < cols.cols(); ++c) vs.push_back(cols.col(c));
    Eigen::MatrixXd ns = nullspace(vs, n);
    return Eigen::VectorXd(ns.col(0));
  };
  Eigen::VectorXd wn = complete(frame_w);
  Eigen::VectorXd zn = complete(frame_z);

  Eigen::MatrixXd wfull(n, n), zfull(n, n);
  wfull << frame_w, wn;
  zfull << frame_z, zn;
  Eigen::MatrixXd q = zfull * wfull.transpose();
  if (q.determinant() < 0) {
    zfull.col(n - 1) = -zn;
    q = zfull * wfull.transpose();
  }

  Rank1Witness out;
  out.Y = q * B;
  out.X = a0 * B;
  Eigen::MatrixXd jump = out.X - out.Y;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jump, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s0 = std::sqrt(svd.singularValues()[0]);
  out.a = s0 * svd.matrixU().col(0);
  out.b = s0 * svd.matrixV().col(0);
  return out;
}

double evaluate_hypothesis(const WellFamily& K, int i, Hypothesis which, const Eigen::VectorXd& v) {
  double margin = kInf;
  for (int j = 0; j < K.size(); ++j) {
    if (j == i) continue;
    double gi, gj;
    if (which == Hypothesis::H1) {
      gi = (K.well(i) * v).squaredNorm();
      gj = (K.well(j) * v).squaredNorm();
    } else {
      gi = (v.transpose() * K.well(i).inverse()).squaredNorm();
      gj = (v.transpose() * K.well(j).inverse()).squaredNorm();
    }
    margin = std::min(margin, gi - gj);
  }
  return margin;
}

namespace {

// quadratic forms D_j with hypothesis margin f(v) = min_j v^T D_j v
std::vector<Eigen::MatrixXd> hypothesis_forms(const WellFamily& K, int i, Hypothesis which) {
  std::vector<Eigen::MatrixXd> forms;
  auto gram = [&](int k) -> Eigen::MatrixXd {
    if (which == Hypothesis::H1) return K.well(k).transpose() * K.well(k);
    Eigen::MatrixXd inv = K.well(k).inverse();
    return inv * inv.transpose();
  };
  Eigen::MatrixXd gi = gram(i);
  for (int j = 0; j < K.size(); ++j)
    if (j != i) forms.push_back(gi - gram(j));
  return forms;
}

double forms_min(const std::vector<Eigen::MatrixXd>& forms, const Eigen::VectorXd& v, int* argmin) {
  double best = kInf;
  for (std::size_t j = 0; j < forms.size(); ++j) {
    double val = v.dot(forms[j] * v);
    if (val < best) {
      best = val;
      if (argmin) *argmin = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

std::optional<Direction> verify_hypothesis(const WellFamily& K, int i, Hypothesis which,
                                           const SearchOptions& opts) {
  const int n = K.dim();
  if (K.size() == 1) return Direction{Eigen::VectorXd::Unit(n, 0), kInf};

  auto forms = hypothesis_forms(K, i, which);

  Eigen::VectorXd best = Eigen::VectorXd::Unit(n, 0);
  double best_val = forms_min(forms, best, nullptr);
  for (int k = 0; k < opts.n_samples; ++k) {
    Eigen::VectorXd v = Rng::for_item(opts.seed, k).unit_vector(n);
    double val = forms_min(forms, v, nullptr);
    if (val > best_val) {
      best_val = val;
      best = v;
    }
  }

  // projected-gradient ascent with step halving
  double step = 0.1;
  for (int it = 0; it < opts.refine_steps && step > 1e-15; ++it) {
    int active = 0;
    forms_min(forms, best, &active);
    Eigen::VectorXd grad = 2.0 * forms[active] * best;
    grad -= grad.dot(best) * best;
    Eigen::VectorXd cand = (best + step * grad).normalized();
    double val = forms_min(forms, cand, nullptr);
    if (val > best_val) {
      best_val = val;
      best = cand;
    } else {
      step *= 0.5;
    }
  }

  if (best_val > 1e-9) return Direction{best, best_val};
  return std::nullopt;
}

Direction pair_hypothesis_exact(const WellFamily& K, int i, int j, Hypothesis which) {
  auto gram = [&](int k) -> Eigen::MatrixXd {
    if (which == Hypothesis::H1) return K.well(k).transpose() * K.well(k);
    Eigen::MatrixXd inv = K.well(k).inverse();
    return inv * inv.transpose();
  };
  SymEigen se = sym_eigen(gram(i) - gram(j));
  return Direction{se.eigenvectors.col(0), se.eigenvalues[0]};
}

bool generic_vectors(const OrientedTree& tree, int n) {
  std::vector<Eigen::VectorXd> vs;
  for (const auto& pq : tree.vectors) {
    if (pq.p.norm() > 0.0) vs.push_back(pq.p);
    if (pq.q.norm() > 0.0) vs.push_back(pq.q);
  }
  const int total = static_cast<int>(vs.size());
  if (total < n) return true;  // no n-subset to test

  std::vector<int> idx(n);
  // enumerate n-subsets of {0..total-1}
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    Eigen::MatrixXd m(n, n);
    for (int c = 0; c < n; ++c) m.col(c) = vs[idx[c]];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    if (svd.singularValues()[n - 1] <= 1e-10 * svd.singularValues()[0]) return false;

    int pos = n - 1;
    while (pos >= 0 && idx[pos] == total - n + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int c = pos + 1; c < n; ++c) idx[c] = idx[c - 1] + 1;
  }
  return true;
}

namespace {

struct TreeBfs {
  std::vector<int> parent;
  std::vector<int> order;
};

TreeBfs bfs_tree(int m, const std::vector<std::pair<int, int>>& edges, int root) {
  std::vector<std::vector<int>> adj(m);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());

  TreeBfs out;
  out.parent.assign(m, -1);
  std::vector<char> seen(m, 0);
  std::vector<int> queue{root};
  seen[root] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int v = queue[head];
    out.order.push_back(v);
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        out.parent[w] = v;
        queue.push_back(w);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<std::optional<Direction>> separating_directions(const WellFamily& K,
                                                            const OrientedTree& tree) {
  const int n = K.dim();
  const int m = K.size();
  std::vector<std::optional<Direction>> out(m);
  if (m == 1) {
    out[0] = Direction{Eigen::VectorXd::Unit(n, 0), kInf};
    return out;
  }
  if (!generic_vectors(tree, n))
    throw Error(ErrorCode::NotGeneric, "separating_directions: tree vectors are not generic");

  for (int target = 0; target < m; ++target) {
    TreeBfs bfs = bfs_tree(m, tree.edges, target);

    // a one-sided edge whose kept vector vanishes cannot certify a strict
    // margin for this target; the certificate is absent, not an error
    bool one_sided = false;
    std::vector<Eigen::VectorXd> annihilate, keep;
    for (std::size_t k = 0; k < tree.edges.size(); ++k) {
      auto [a, b] = tree.edges[k];
      // sign +1 when the stored orientation a -> b points away from the target
      const bool away = (bfs.parent[b] == a);
      const Eigen::VectorXd& r = away ? tree.vectors[k].q : tree.vectors[k].p;
      const Eigen::VectorXd& s = away ? tree.vectors[k].p : tree.vectors[k].q;
      if (r.norm() > 0.0) annihilate.push_back(r);
      if (s.norm() > 0.0)
        keep.push_back(s);
      else
        one_sided = true;
    }
    if (one_sided) continue;

    Eigen::MatrixXd ns = nullspace(annihilate, n);
    if (ns.cols() == 0)
      throw Error(ErrorCode::MarginNonPositive,
                  "separating_directions: annihilated vectors span the whole space");

    // candidate directions inside the nullspace; prefer the one maximizing
    // the kept-vector mass, fall back to basis vectors
    std::vector<Eigen::VectorXd> candidates;
    if (!keep.empty()) {
      Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(ns.cols(), ns.cols());
      for (const auto& s : keep) {
        Eigen::VectorXd proj = ns.transpose() * s;
        mass += proj * proj.transpose();
      }
      SymEigen se = sym_eigen(mass);
      candidates.push_back((ns * se.eigenvectors.col(0)).normalized());
    }
    for (int c = 0; c < ns.cols(); ++c) candidates.push_back(ns.col(c));

    Eigen::VectorXd best = candidates.front();
    double best_margin = -kInf;
    for (const auto& v : candidates) {
      double margin = evaluate_hypothesis(K, target, Hypothesis::H1, v);
      if (margin > best_margin) {
        best_margin = margin;
        best = v;
      }
    }

    for (const auto& s : keep)
      if (std::abs(s.dot(best)) <= 1e-12 * s.norm())
        throw Error(ErrorCode::MarginNonPositive,
                    "separating_directions: direction orthogonal to a kept vector");
    if (!(best_margin > 0.0))
      throw Error(ErrorCode::MarginNonPositive,
                  "separating_directions: nonpositive margin despite genericity");
    out[target] = Direction{best, best_margin};
  }
  return out;
}

CompatibilityReport compatibility_report(const WellFamily& K, std::uint64_t seed) {
  const int n = K.dim();
  const int m = K.size();

  CompatibilityReport rep;
  rep.n = n;
  rep.m = m;
  rep.sigma = K.sigma();
  rep.seed = seed;

  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      auto conn = rank1_connect(K.well(i), K.well(j));
      if (!conn || conn->zero()) continue;
      Rank1Connection edge;
      edge.i = i;
      edge.j = j;
      edge.vectors = *conn;
      edge.witness = rank1_witness(K.well(i), K.well(j));
      rep.edges.push_back(std::move(edge));
    }
  }

  // connectivity via union-find
  std::vector<int> root(m);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  for (const auto& e : rep.edges) root[find(e.i)] = find(e.j);
  rep.connected = true;
  for (int v = 0; v < m; ++v) rep.connected = rep.connected && find(v) == find(0);

  OrientedTree tree;
  if (rep.connected && m >= 2) {
    std::vector<std::pair<int, int>> all;
    for (const auto& e : rep.edges) all.emplace_back(e.i, e.j);
    TreeBfs bfs = bfs_tree(m, all, 0);
    for (int v : bfs.order) {
      if (bfs.parent[v] < 0) continue;
      tree.edges.emplace_back(bfs.parent[v], v);
      tree.vectors.push_back(*rank1_connect(K.well(bfs.parent[v]), K.well(v)));
    }
    rep.spanning_tree = tree.edges;
  }

  if (rep.connected && m <= n) {
    rep.generic = m < 2 ? true : generic_vectors(tree, n);
    if (*rep.generic && m >= 2) rep.constructive = separating_directions(K, tree);
  }
  if (rep.constructive.empty()) rep.constructive.assign(m, std::nullopt);

  rep.directions_h1.resize(m);
  rep.directions_h2.resize(m);
  for (int i = 0; i < m; ++i) {
    rep.directions_h1[i] = verify_hypothesis(K, i, Hypothesis::H1, {seed + 2 * i, 20000, 200});
    rep.directions_h2[i] = verify_hypothesis(K, i, Hypothesis::H2, {seed + 2 * i + 1, 20000, 200});
  }

  if (m == 2) {
    bool ok = true;
    for (int i = 0; i < 2; ++i) {
      const double tol = 1e-10 * (1.0 + K.well(i).squaredNorm());
      ok = ok && (pair_hypothesis_exact(K, i, 1 - i, Hypothesis::H1).margin > tol ||
                  pair_hypothesis_exact(K, i, 1 - i, Hypothesis::H2).margin > tol);
    }
    rep.dichotomy_ok = ok;
  }
  return rep;
}

MajorizationConstants majorization_constants(const WellFamily& K, int i,
                                             const std::vector<MajorizationPair>& pairs,
                                             const Eigen::MatrixXd& R, std::uint64_t seed,
                                             int n_samples) {
  const int n = K.dim();
  const int m = K.size();
  double scale = 0.0;
  for (int k = 0; k < m; ++k) scale = std::max(scale, K.well(k).norm());

  // precompute per-sample distances and per-pair linear terms once;
  // candidate (c1, c2) checks are then vectorized scans
  std::vector<double> d_family(n_samples), d_target(n_samples);
  std::vector<std::vector<double>> lin(pairs.size(), std::vector<double>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    Rng rng = Rng::for_item(seed, k);
    Eigen::MatrixXd M;
    const int kind = k % (2 * m + 1);
    if (kind < m) {
      // tubular neighborhood of well `kind`
      Eigen::MatrixXd bump = rng.normal_matrix(n, n);
      bump /= std::max(bump.norm(), 1e-12);
      M = rng.rotation(n) * K.well(kind) + rng.uniform(0.0, 1.0 + scale) * bump;
    } else if (kind < 2 * m) {
      // exact orbit points; these pin the sign of the linear term
      M = rng.rotation(n) * K.well(kind - m);
    } else {
      M = (1.0 + scale) * rng.normal_matrix(n, n);
    }
    d_family[k] = dist_to_family(M, K).distance;
    d_target[k] = dist_to_well(M, K.well(i)).distance;
    for (std::size_t p = 0; p < pairs.size(); ++p)
      lin[p][k] = pairs[p].v.dot((R - M) * pairs[p].tau);
  }

  const double slack = 1e-9 * (1.0 + scale);
  auto valid = [&](double c1, double c2) {
    for (std::size_t p = 0; p < pairs.size(); ++p)
      for (int k = 0; k < n_samples; ++k)
        if (d_target[k] > c1 * d_family[k] + c2 * lin[p][k] + slack) return false;
    return true;
  };

  // grid {2^k}, smallest total exponent first, then smallest c1
  for (int total = 0; total <= 40; ++total) {
    for (int k1 = std::max(0, total - 20); k1 <= std::min(total, 20); ++k1) {
      const double c1 = std::ldexp(1.0, k1);
      const double c2 = std::ldexp(1.0, total - k1);
      if (valid(c1, c2)) return {c1, c2};
    }
  }
  throw Error(ErrorCode::NoConstantsFound,
              "majorization_constants: no valid pair up to 2^20 (hypothesis violated?)");
}

}  // namespace mrl
