#include "mrl/registration.hpp"

#include <algorithm>
#include <cmath>

#include "mrl/linalg.hpp"
#include "mrl/rng.hpp"

namespace mrl {

namespace {

struct Facets {
  Eigen::MatrixXd normals;  // rows: inward unit normals, one per omitted vertex
  Eigen::VectorXd offsets;  // interior is normals * x >= offsets
};

Facets simplex_facets(const std::vector<Eigen::VectorXd>& points) {
  const int n = static_cast<int>(points.front().size());
  if (static_cast<int>(points.size()) != n + 1)
    throw Error(ErrorCode::DegenerateSimplex, "simplex facets: need n+1 vertices");

  Facets out;
  out.normals.resize(n + 1, n);
  out.offsets.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    std::vector<Eigen::VectorXd> spanning;
    const int base = i == 0 ? 1 : 0;
    for (int j = 0; j <= n; ++j)
      if (j != i && j != base) spanning.push_back(points[j] - points[base]);
    Eigen::MatrixXd ns = nullspace(spanning, n);
    if (ns.cols() != 1)
      throw Error(ErrorCode::DegenerateSimplex, "simplex facets: degenerate facet");
    Eigen::VectorXd nu = ns.col(0);
    if (nu.dot(points[i] - points[base]) < 0) nu = -nu;
    out.normals.row(i) = nu.transpose();
    out.offsets[i] = nu.dot(points[base]);
  }
  return out;
}

}  // namespace

std::pair<double, Eigen::VectorXd> simplex_inscribed_ball(
    const std::vector<Eigen::VectorXd>& points) {
  const int n = static_cast<int>(points.front().size());
  Facets f = simplex_facets(points);

  // Chebyshev center of a simplex touches every facet: nu_i . y - r = c_i
  Eigen::MatrixXd lhs(n + 1, n + 1);
  lhs.leftCols(n) = f.normals;
  lhs.col(n).setConstant(-1.0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  if (!lu.isInvertible())
    throw Error(ErrorCode::DegenerateSimplex, "inscribed ball: singular facet system");
  Eigen::VectorXd sol = lu.solve(f.offsets);
  const double r = sol[n];
  if (!(r > 0.0))
    throw Error(ErrorCode::DegenerateSimplex, "inscribed ball: nonpositive inradius");
  return {r, sol.head(n)};
}

PointCorrespondence::PointCorrespondence(int n_, std::vector<Eigen::VectorXd> z_,
                                         std::vector<Eigen::VectorXd> zeta_, Eigen::MatrixXd A_)
    : n(n_), z(std::move(z_)), zeta(std::move(zeta_)), A(std::move(A_)) {
  if (static_cast<int>(z.size()) != n + 1 || static_cast<int>(zeta.size()) != n + 1)
    throw Error(ErrorCode::BadParams, "PointCorrespondence: need n+1 points on both sides");
  for (const auto& p : z)
    if (p.norm() > 1.0 + 1e-12)
      throw Error(ErrorCode::BadParams, "PointCorrespondence: source points must lie in the unit ball");
  if (std::abs(A.determinant()) <= 1e-12)
    throw Error(ErrorCode::SingularWell, "PointCorrespondence: reference matrix is singular");

  auto [r, center] = simplex_inscribed_ball(z);
  if (r <= 1e-6)
    throw Error(ErrorCode::DegenerateSimplex, "PointCorrespondence: inradius below 1e-6");
  b = r;
  incenter = center;
}

double PointCorrespondence::distortion() const {
  double eps = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      eps = std::max(eps, std::abs((zeta[i] - zeta[j]).norm() - (A * (z[i] - z[j])).norm()));
  return eps;
}

RecoveredMap recover_orthogonal_affine(const PointCorrespondence& pc) {
  const int n = pc.n;

  Eigen::MatrixXd src(n, n), dst(n, n);
  for (int i = 1; i <= n; ++i) {
    src.col(i - 1) = pc.A * (pc.z[i] - pc.z[0]);
    dst.col(i - 1) = pc.zeta[i] - pc.zeta[0];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(src);
  if (lu.rank() < n)
    throw Error(ErrorCode::SingularSystem, "recover_orthogonal_affine: transformed sources dependent");
  Eigen::MatrixXd raw = dst * lu.inverse();  // raw maps A z_i' to zeta_i'

  // Gram-Schmidt of the raw frame, in natural index order
  Eigen::MatrixXd ortho(n, n);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd col = raw.col(c);
    for (int k = 0; k < c; ++k) col -= ortho.col(k).dot(col) * ortho.col(k);
    const double norm = col.norm();
    if (norm <= 1e-14)
      throw Error(ErrorCode::SingularSystem, "recover_orthogonal_affine: frame collapse");
    ortho.col(c) = col / norm;
  }

  RecoveredMap out;
  out.map.O = ortho * pc.A;
  out.map.t = pc.zeta[0] - out.map.O * pc.z[0];
  for (int i = 0; i <= n; ++i)
    out.residual = std::max(out.residual, (pc.zeta[i] - out.map(pc.z[i])).norm());
  return out;
}

double extend_to_point(const AffineMap& map, const Eigen::VectorXd& z, const Eigen::VectorXd& zeta) {
  return (zeta - map(z)).norm();
}

PolarBoundCheck polar_radius_bound(const std::vector<Eigen::VectorXd>& z, double b,
                                   std::uint64_t seed, int n_samples) {
  const int n = static_cast<int>(z.front().size());
  Facets f = simplex_facets(z);
  for (int i = 0; i < f.offsets.size(); ++i)
    if (f.offsets[i] > -b + 1e-12)
      throw Error(ErrorCode::DegenerateSimplex, "polar_radius_bound: conv(z) does not contain B_b(0)");

  PolarBoundCheck out;
  out.radius = n / b;
  out.ok = true;
  const double reach = 2.0 * out.radius;
  for (int k = 0; k < n_samples; ++k) {
    Eigen::VectorXd x = Rng::for_item(seed, k).in_ball(n, reach);
    bool feasible = true;
    for (const auto& zi : z) feasible = feasible && x.dot(zi) <= 1.0;
    if (!feasible) continue;
    ++out.samples;
    out.max_norm = std::max(out.max_norm, x.norm());
    if (x.norm() > out.radius + 1e-9) out.ok = false;
  }
  return out;
}

Eigen::VectorXd barycentric_coefficients(const std::vector<Eigen::VectorXd>& z,
                                         const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXd basis(n, n);
  for (int i = 1; i <= n; ++i) basis.col(i - 1) = z[i] - z[0];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
  if (lu.rank() < n)
    throw Error(ErrorCode::DegenerateSimplex, "barycentric_coefficients: degenerate simplex");
  return lu.solve(v);
}

}  // namespace mrl
