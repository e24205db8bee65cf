#include "mrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrl/parallel.hpp"
#include "mrl/rng.hpp"

namespace mrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double holder_exponent(double p, double q) {
  // s = 1 + p/q*, with q* the Holder conjugate of q; q = 1 means q* = inf
  if (q <= 1.0) return 1.0;
  return 1.0 + p * (q - 1.0) / q;
}

std::array<double, 7> quantiles_of(std::vector<double> v) {
  std::array<double, 7> out{};
  if (v.empty()) return out;
  std::sort(v.begin(), v.end());
  const std::array<double, 7> qs{0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};
  for (std::size_t k = 0; k < qs.size(); ++k) {
    const auto idx = static_cast<std::size_t>(
        std::llround(qs[k] * static_cast<double>(v.size() - 1)));
    out[k] = v[std::min(idx, v.size() - 1)];
  }
  return out;
}

}  // namespace

bool interpolatable(const GridField& f, const Eigen::VectorXd& x) {
  std::array<int, 3> base{0, 0, 0};
  for (int d = 0; d < f.n; ++d) {
    const double t = (x[d] - f.origin) / f.spacing;
    const int i = static_cast<int>(std::floor(t));
    if (i < 0 || i > f.dims - 2) return false;
    base[d] = i;
  }
  for (int c = 0; c < (1 << f.n); ++c) {
    std::array<int, 3> idx = base;
    for (int d = 0; d < f.n; ++d) idx[d] += (c >> d) & 1;
    if (!f.masked(f.index(idx))) return false;
  }
  return true;
}

EnergyBreakdown energy(const GridField& f, const Jacobians& jac, const WellFamily& K, double vs,
                       double p, double q) {
  if (!(vs > 0.0 && vs <= 1.0))
    throw Error(ErrorCode::BadParams, "energy: varsigma must lie in (0, 1]");
  if (p < 1.0 || q < 1.0) throw Error(ErrorCode::BadParams, "energy: need p, q >= 1");

  const std::int64_t count = f.node_count();
  std::vector<double> dist_term(count, 0.0), hess_term(count, 0.0);
  parallel_for(count, [&](std::int64_t lin) {
    if (!f.masked(lin)) return;
    dist_term[lin] = std::pow(dist_to_family(jac.gradient(lin), K).distance, p);
    hess_term[lin] = std::pow(jac.hess_norm[lin], q);
  });

  const double cell = std::pow(f.spacing, f.n);
  double dsum = 0.0, hsum = 0.0;
  for (std::int64_t lin = 0; lin < count; ++lin) {
    dsum += dist_term[lin];
    hsum += hess_term[lin];
  }

  EnergyBreakdown out;
  out.sigma_param = vs;
  out.p = p;
  out.q = q;
  out.first_term = dsum * cell / vs;
  out.second_term = hsum * cell * std::pow(vs, q - 1.0);
  out.total = out.first_term + out.second_term;
  out.epsilon = std::pow(vs, 1.0 / p);
  return out;
}

MajorityPhase majority_phase(const GridField& f, const Jacobians& jac, const WellFamily& K,
                             double p, double q) {
  const double s = holder_exponent(p, q);
  const double sigma = K.sigma();
  const std::int64_t count = f.node_count();

  std::vector<double> level(count, kInf);
  std::vector<int> nearest(count, -1);
  parallel_for(count, [&](std::int64_t lin) {
    if (!f.masked(lin)) return;
    FamilyProjection proj = dist_to_family(jac.gradient(lin), K);
    level[lin] = std::pow(proj.distance, s);
    nearest[lin] = proj.well_index;
  });

  const double lo = std::pow(sigma / 2.0, s);
  const double hi = std::pow(sigma, s);
  double best_alpha = 0.0, best_perimeter = kInf;
  GridSet best_set;
  for (int k = 0; k < 64; ++k) {
    const double alpha = lo * std::pow(hi / lo, (k + 1) / 65.0);
    GridSet u0;
    u0.member.assign(count, 0);
    for (std::int64_t lin = 0; lin < count; ++lin)
      u0.member[lin] = f.masked(lin) && level[lin] < alpha ? 1 : 0;
    const double per = discrete_perimeter(f, u0);
    if (per < best_perimeter) {
      best_perimeter = per;
      best_alpha = alpha;
      best_set = std::move(u0);
    }
  }

  std::int64_t mask_count = 0;
  for (std::int64_t lin = 0; lin < count; ++lin) mask_count += f.masked(lin);
  const std::int64_t inside = best_set.count();
  if (2 * inside < mask_count)
    throw Error(ErrorCode::NoMajority, "majority_phase: level set covers less than half the ball");

  std::vector<std::int64_t> votes(K.size(), 0);
  for (std::int64_t lin = 0; lin < count; ++lin)
    if (best_set.contains(lin)) ++votes[nearest[lin]];
  int winner = 0;
  for (int i = 1; i < K.size(); ++i)
    if (votes[i] > votes[winner]) winner = i;

  MajorityPhase out;
  out.index = winner;
  out.u0 = std::move(best_set);
  out.alpha = best_alpha;
  out.perimeter = best_perimeter;
  out.volume_fraction = static_cast<double>(inside) / static_cast<double>(mask_count);
  for (int i = 0; i < K.size(); ++i)
    out.tie = out.tie || (i != winner && votes[i] == votes[winner]);
  return out;
}

TruncationResult lipschitz_truncate(const GridField& f, const Jacobians& jac, double lambda,
                                    double q) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::BadParams, "lipschitz_truncate: lambda must be positive");
  const int n = f.n;
  const double h = f.spacing;
  const std::int64_t count = f.node_count();

  std::vector<double> du_norm(count, 0.0);
  for (std::int64_t lin = 0; lin < count; ++lin)
    if (f.masked(lin)) du_norm[lin] = jac.gradient(lin).norm();

  // dyadic radii h, 2h, 4h, ..., topped with the full diameter scale 2
  std::vector<double> radii;
  for (double r = h; r < 2.0; r *= 2.0) radii.push_back(r);
  radii.push_back(2.0);

  std::vector<double> maximal(count, 0.0);
  parallel_for(count, [&](std::int64_t lin) {
    if (!f.masked(lin)) return;
    const auto idx = f.unindex(lin);
    double best = 0.0;
    for (double r : radii) {
      const int reach = static_cast<int>(std::floor(r / h + 1e-12));
      const double r2 = r * r;
      double sum = 0.0;
      std::int64_t cnt = 0;
      std::array<int, 3> nb{0, 0, 0};
      const int z_lo = n == 3 ? -reach : 0;
      const int z_hi = n == 3 ? reach : 0;
      for (int dz = z_lo; dz <= z_hi; ++dz) {
        for (int dy = -reach; dy <= reach; ++dy) {
          for (int dx = -reach; dx <= reach; ++dx) {
            const double d2 = (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy +
                               static_cast<double>(dz) * dz) * h * h;
            if (d2 > r2 + 1e-12) continue;
            nb[0] = idx[0] + dx;
            nb[1] = idx[1] + dy;
            if (n == 3) nb[2] = idx[2] + dz;
            if (!f.in_grid(nb)) continue;
            const std::int64_t nlin = f.index(nb);
            if (!f.masked(nlin)) continue;
            sum += du_norm[nlin];
            ++cnt;
          }
        }
      }
      if (cnt > 0) best = std::max(best, sum / static_cast<double>(cnt));
    }
    maximal[lin] = best;
  });

  TruncationResult out;
  out.bad.member.assign(count, 0);
  std::vector<std::int64_t> good;
  for (std::int64_t lin = 0; lin < count; ++lin) {
    if (!f.masked(lin)) continue;
    if (maximal[lin] <= lambda)
      good.push_back(lin);
    else
      out.bad.member[lin] = 1;
  }
  if (good.empty())
    throw Error(ErrorCode::EmptyGoodSet, "lipschitz_truncate: lambda below every local average");

  out.w = f;
  const double slope = std::sqrt(static_cast<double>(n)) * lambda;
  std::vector<std::int64_t> bad_nodes;
  for (std::int64_t lin = 0; lin < count; ++lin)
    if (out.bad.contains(lin)) bad_nodes.push_back(lin);

  parallel_for(static_cast<std::int64_t>(bad_nodes.size()), [&](std::int64_t bi) {
    const std::int64_t lin = bad_nodes[bi];
    const Eigen::VectorXd x = f.coord(f.unindex(lin));
    Eigen::VectorXd env = Eigen::VectorXd::Constant(n, kInf);
    for (std::int64_t g : good) {
      const double reach = slope * (f.coord(f.unindex(g)) - x).norm();
      for (int c = 0; c < n; ++c)
        env[c] = std::min(env[c], f.values[g * n + c] + reach);
    }
    out.w.set_value(lin, env);
  });

  out.bad_dilated = dilate(f, out.bad);
  out.bad_volume = set_volume(f, out.bad);
  out.bad_dilated_volume = set_volume(f, out.bad_dilated);
  out.bad_dilated_perimeter = discrete_perimeter(f, out.bad_dilated);

  Jacobians jw = differentiate(out.w);
  const double cell = std::pow(h, n);
  for (std::int64_t lin = 0; lin < count; ++lin) {
    if (!f.masked(lin)) continue;
    out.dw_sup = std::max(out.dw_sup, jw.gradient(lin).norm());
    out.diff_lq += std::pow((jac.gradient(lin) - jw.gradient(lin)).norm(), q) * cell;
    if (du_norm[lin] > lambda) out.tail_lq += std::pow(du_norm[lin], q) * cell;
  }
  return out;
}

GridSet full_region(const GridField& f) {
  GridSet out;
  out.member = f.mask;
  return out;
}

GridSet low_determinant_set(const GridField& f, const Jacobians& jac, double sigma) {
  GridSet out;
  out.member.assign(f.node_count(), 0);
  for (std::int64_t lin = 0; lin < f.node_count(); ++lin)
    if (f.masked(lin) && jac.gradient(lin).determinant() <= sigma) out.member[lin] = 1;
  return out;
}

namespace {

struct Simplex {
  std::array<std::int64_t, 4> nodes;  // n+1 grid nodes
};

std::vector<std::array<int, 3>> kuhn_orders(int n) {
  std::vector<int> axes(n);
  std::iota(axes.begin(), axes.end(), 0);
  std::vector<std::array<int, 3>> out;
  do {
    std::array<int, 3> perm{0, 0, 0};
    for (int d = 0; d < n; ++d) perm[d] = axes[d];
    out.push_back(perm);
  } while (std::next_permutation(axes.begin(), axes.end()));
  return out;
}

}  // namespace

int degree_at(const GridField& w, const GridSet& region, const Eigen::VectorXd& xi_in) {
  const int n = w.n;
  const double h = w.spacing;
  const std::int64_t count = w.node_count();

  // Lipschitz scale from face-adjacent node pairs inside the region
  double lip = 0.0;
  for (std::int64_t lin = 0; lin < count; ++lin) {
    if (!region.contains(lin)) continue;
    const auto idx = w.unindex(lin);
    for (int d = 0; d < n; ++d) {
      std::array<int, 3> nb = idx;
      nb[d] += 1;
      if (!w.in_grid(nb) || !region.contains(w.index(nb))) continue;
      lip = std::max(lip, (w.value(lin) - w.value(w.index(nb))).norm() / h);
    }
  }

  // clearance against the image of the region boundary
  double clearance = kInf;
  for (std::int64_t lin = 0; lin < count; ++lin) {
    if (!region.contains(lin)) continue;
    const auto idx = w.unindex(lin);
    bool boundary = false;
    for (int d = 0; d < n && !boundary; ++d) {
      for (int s = -1; s <= 1 && !boundary; s += 2) {
        std::array<int, 3> nb = idx;
        nb[d] += s;
        boundary = !w.in_grid(nb) || !region.contains(w.index(nb));
      }
    }
    if (boundary) clearance = std::min(clearance, (w.value(lin) - xi_in).norm());
  }
  if (!(clearance > 2.0 * lip * h))
    throw Error(ErrorCode::BoundaryTooClose, "degree_at: target too close to the boundary image");

  // cells fully inside the region, triangulated the Kuhn way
  std::vector<Simplex> simplices;
  const auto orders = kuhn_orders(n);
  for (std::int64_t lin = 0; lin < count; ++lin) {
    const auto base = w.unindex(lin);
    bool cell_ok = true;
    for (int d = 0; d < n; ++d) cell_ok = cell_ok && base[d] + 1 < w.dims;
    if (!cell_ok) continue;
    for (int c = 0; c < (1 << n) && cell_ok; ++c) {
      std::array<int, 3> corner = base;
      for (int d = 0; d < n; ++d) corner[d] += (c >> d) & 1;
      cell_ok = region.contains(w.index(corner));
    }
    if (!cell_ok) continue;
    for (const auto& perm : orders) {
      Simplex s;
      std::array<int, 3> at = base;
      s.nodes[0] = w.index(at);
      for (int k = 0; k < n; ++k) {
        at[perm[k]] += 1;
        s.nodes[k + 1] = w.index(at);
      }
      simplices.push_back(s);
    }
  }

  Eigen::VectorXd dir(n);
  for (int d = 0; d < n; ++d) dir[d] = d + 1.0;
  dir.normalize();

  for (int attempt = 1; attempt <= 8; ++attempt) {
    Eigen::VectorXd xi = xi_in + (attempt - 1) * 1e-7 * h * dir;
    int deg = 0;
    bool on_face = false;
    for (const auto& s : simplices) {
      Eigen::MatrixXd src(n, n), img(n, n);
      Eigen::VectorXd img0 = w.value(s.nodes[0]);
      Eigen::VectorXd src0 = w.coord(w.unindex(s.nodes[0]));

      // bounding-box reject
      bool outside = false;
      for (int d = 0; d < n && !outside; ++d) {
        double lo = img0[d], hi = img0[d];
        for (int k = 1; k <= n; ++k) {
          lo = std::min(lo, w.value(s.nodes[k])[d]);
          hi = std::max(hi, w.value(s.nodes[k])[d]);
        }
        outside = xi[d] < lo - 1e-9 || xi[d] > hi + 1e-9;
      }
      if (outside) continue;

      for (int k = 1; k <= n; ++k) {
        img.col(k - 1) = w.value(s.nodes[k]) - img0;
        src.col(k - 1) = w.coord(w.unindex(s.nodes[k])) - src0;
      }
      const double det_img = img.determinant();
      if (std::abs(det_img) < 1e-14 * std::pow(std::max(lip, 1.0) * h, n)) continue;
      Eigen::VectorXd lambda = img.partialPivLu().solve(xi - img0);
      double lam0 = 1.0 - lambda.sum();
      double min_l = lam0;
      for (int k = 0; k < n; ++k) min_l = std::min(min_l, lambda[k]);
      const double face_tol = 1e-9;
      if (min_l >= -face_tol && min_l <= face_tol) {
        on_face = true;
        break;
      }
      if (min_l > 0.0)
        deg += (det_img > 0 ? 1 : -1) * (src.determinant() > 0 ? 1 : -1);
    }
    if (!on_face) return deg;
  }
  throw Error(ErrorCode::BoundaryTooClose, "degree_at: target persists on simplex faces");
}

PairStats pair_statistics(const GridField& f, const WellFamily& K, int majority, double epsilon,
                          double C, std::int64_t n_pairs, std::uint64_t seed, double radius) {
  if (!(radius <= 1.0 - 2.0 * f.spacing))
    throw Error(ErrorCode::BadParams, "pair_statistics: radius must stay 2h inside the ball");

  const Eigen::MatrixXd& A = K.well(majority);
  std::vector<double> s_values(n_pairs, 0.0);
  parallel_for(n_pairs, [&](std::int64_t k) {
    Rng rng = Rng::for_item(seed, static_cast<std::uint64_t>(k));
    Eigen::VectorXd x = rng.in_ball(f.n, radius);
    Eigen::VectorXd y = rng.in_ball(f.n, radius);
    s_values[k] = (f.sample(y) - f.sample(x)).norm() - (A * (x - y)).norm();
  });

  PairStats out;
  out.count = n_pairs;
  out.seed = seed;
  out.epsilon = epsilon;
  out.threshold = C * epsilon;
  out.quantiles = quantiles_of(s_values);
  std::vector<double> abs_vals(s_values.size());
  std::int64_t violations = 0;
  for (std::size_t k = 0; k < s_values.size(); ++k) {
    abs_vals[k] = std::abs(s_values[k]);
    if (abs_vals[k] > out.threshold) ++violations;
  }
  out.abs_quantiles = quantiles_of(std::move(abs_vals));
  out.violating_fraction = static_cast<double>(violations) / static_cast<double>(n_pairs);
  return out;
}

IbpResult ibp_simplex_check(const GridField& f, const Jacobians& jac, const WellFamily& K,
                            int majority, const std::vector<Eigen::VectorXd>& vertices,
                            const Eigen::VectorXd& x, const AffineMap& l_R, double c1, double c2,
                            int quad_points) {
  const int n = f.n;
  if (static_cast<int>(vertices.size()) != n + 1)
    throw Error(ErrorCode::BadParams, "ibp_simplex_check: need n+1 vertices");
  quad_points = std::max(quad_points, 200);

  // barycentric coordinates of x; the interior-point hypothesis
  Eigen::MatrixXd basis(n, n);
  for (int i = 1; i <= n; ++i) basis.col(i - 1) = vertices[i] - vertices[0];
  Eigen::VectorXd lam_tail = basis.partialPivLu().solve(x - vertices[0]);
  Eigen::VectorXd lambda(n + 1);
  lambda[0] = 1.0 - lam_tail.sum();
  lambda.tail(n) = lam_tail;
  for (int i = 0; i <= n; ++i)
    if (!(lambda[i] > 0.0))
      throw Error(ErrorCode::HypothesisViolated, "ibp_simplex_check: x is not interior");

  // directional dominance (strict, uniform over vertices and competitors)
  double alpha = kInf;
  for (int i = 0; i <= n; ++i) {
    Eigen::VectorXd tau = (x - vertices[i]).normalized();
    const double lead = (K.well(majority) * tau).norm();
    for (int j = 0; j < K.size(); ++j) {
      if (j == majority) continue;
      alpha = std::min(alpha, lead / (K.well(j) * tau).norm() - 1.0);
    }
  }
  if (!(alpha > 0.0))
    throw Error(ErrorCode::HypothesisViolated, "ibp_simplex_check: directional dominance fails");

  const Eigen::MatrixXd& R = l_R.O;
  IbpResult out;
  out.alpha = alpha;

  for (int i = 0; i <= n; ++i) {
    const Eigen::VectorXd seg = x - vertices[i];
    const double len = seg.norm();
    const Eigen::VectorXd tau = seg / len;
    const Eigen::VectorXd v = lambda[i] * (R * seg);

    double seg_major = 0.0, seg_family = 0.0, seg_linear = 0.0;
    for (int t = 0; t < quad_points; ++t) {
      const Eigen::VectorXd z = vertices[i] + ((t + 0.5) / quad_points) * seg;
      const Eigen::MatrixXd g = sample_gradient(f, jac, z);
      seg_major += dist_to_well(g, K.well(majority)).distance;
      seg_family += dist_to_family(g, K).distance;
      seg_linear += v.dot((R - g) * tau);
    }
    const double wq = len / quad_points;
    out.lhs += seg_major * wq;
    out.rhs += c1 * seg_family * wq;
    out.identity_lhs += seg_linear * wq;

    const Eigen::VectorXd mismatch = l_R(vertices[i]) - f.sample(vertices[i]);
    out.rhs += c2 * v.norm() * mismatch.norm();
    out.identity_rhs -= v.dot(mismatch);
  }
  out.margin = out.rhs - out.lhs;
  return out;
}

namespace {

std::vector<Eigen::VectorXd> regular_simplex(int n) {
  std::vector<Eigen::VectorXd> out;
  if (n == 2) {
    for (int k = 0; k < 3; ++k) {
      const double ang = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
      out.push_back(Eigen::Vector2d(std::cos(ang), std::sin(ang)));
    }
  } else {
    const double s = 1.0 / std::sqrt(3.0);
    out.push_back(Eigen::Vector3d(s, s, s));
    out.push_back(Eigen::Vector3d(s, -s, -s));
    out.push_back(Eigen::Vector3d(-s, s, -s));
    out.push_back(Eigen::Vector3d(-s, -s, s));
  }
  return out;
}

}  // namespace

AffineFitReport affine_fit_report(const GridField& f, const WellFamily& K, int majority,
                                  double epsilon, double C, std::uint64_t seed) {
  const int n = f.n;
  const double threshold = C * epsilon;
  const auto base = regular_simplex(n);

  AffineFitReport out;
  bool found = false;
  std::vector<Eigen::VectorXd> pts(n + 1);
  for (int attempt = 0; attempt < 100 && !found; ++attempt) {
    out.attempts = attempt + 1;
    Rng rng = Rng::for_item(seed, attempt);
    Eigen::MatrixXd rot = rng.rotation(n);
    for (int k = 0; k <= n; ++k) pts[k] = 0.5 * (rot * base[k]) + rng.in_ball(n, 0.125);

    double distortion = 0.0;
    for (int k = 0; k <= n; ++k)
      for (int l = k + 1; l <= n; ++l)
        distortion = std::max(distortion,
                              std::abs((f.sample(pts[k]) - f.sample(pts[l])).norm() -
                                       (K.well(majority) * (pts[k] - pts[l])).norm()));
    found = distortion <= threshold;
  }
  if (!found)
    throw Error(ErrorCode::NoGoodSimplex,
                "affine_fit_report: no low-distortion simplex after 100 attempts");

  std::vector<Eigen::VectorXd> images(n + 1);
  for (int k = 0; k <= n; ++k) images[k] = f.sample(pts[k]);
  PointCorrespondence pc(n, pts, images, K.well(majority));
  RecoveredMap rec = recover_orthogonal_affine(pc);
  out.map = rec.map;
  out.residual = rec.residual;

  const double sample_radius = std::min(0.9, 1.0 - 2.0 * f.spacing);
  const int n_probe = 10000;
  std::vector<std::uint8_t> inlier(n_probe, 0);
  parallel_for(n_probe, [&](std::int64_t k) {
    Rng rng = Rng::for_item(seed ^ 0x5bd1e995u, static_cast<std::uint64_t>(k));
    Eigen::VectorXd y = rng.in_ball(n, sample_radius);
    inlier[k] = (f.sample(y) - out.map(y)).norm() <= threshold ? 1 : 0;
  });
  std::int64_t hits = 0;
  for (auto v : inlier) hits += v;
  out.inlier_fraction = static_cast<double>(hits) / n_probe;
  return out;
}

}  // namespace mrl
