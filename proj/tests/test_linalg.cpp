#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "mrl/linalg.hpp"
#include "mrl/rng.hpp"
#include "mrl/wells.hpp"
#include "oracles.hpp"

using namespace mrl;

TEST_CASE("sym_eigen: identity and diagonal") {
  SymEigen se = sym_eigen(Eigen::Matrix2d::Identity());
  CHECK(se.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(se.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::Matrix3d d = Eigen::Vector3d(3.0, -2.0, 0.0).asDiagonal();
  SymEigen sd = sym_eigen(d);
  CHECK(sd.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(sd.eigenvalues[1] == doctest::Approx(0.0));
  CHECK(sd.eigenvalues[2] == doctest::Approx(-2.0));
  // standard basis eigenvectors up to sign
  CHECK(std::abs(sd.eigenvectors.col(0)[0]) == doctest::Approx(1.0));
  CHECK(std::abs(sd.eigenvectors.col(2)[1]) == doctest::Approx(1.0));
}

TEST_CASE("sym_eigen: golden-ratio eigenvalues of [[0,1],[1,1]]") {
  Eigen::Matrix2d s;
  s << 0, 1, 1, 1;
  SymEigen se = sym_eigen(s);
  // characteristic polynomial lambda^2 - lambda - 1 = 0
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(se.eigenvalues[0] == doctest::Approx(phi).epsilon(1e-12));
  CHECK(se.eigenvalues[1] == doctest::Approx(1.0 - phi).epsilon(1e-12));
}

TEST_CASE("sym_eigen: reconstruction and orthonormality invariants") {
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng = Rng::for_item(11, trial);
    const int n = 2 + trial % 3;
    Eigen::MatrixXd g = rng.normal_matrix(n, n);
    Eigen::MatrixXd s = g + g.transpose();
    SymEigen se = sym_eigen(s);
    Eigen::MatrixXd rec = se.eigenvectors * se.eigenvalues.asDiagonal() * se.eigenvectors.transpose();
    CHECK((rec - s).norm() <= 1e-10 * (1.0 + s.norm()));
    CHECK((se.eigenvectors.transpose() * se.eigenvectors - Eigen::MatrixXd::Identity(n, n)).norm() <=
          1e-10);
    for (int k = 0; k + 1 < n; ++k) CHECK(se.eigenvalues[k] >= se.eigenvalues[k + 1]);
  }
}

TEST_CASE("sym_eigen: rejects asymmetric input") {
  Eigen::Matrix2d bad;
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(sym_eigen(bad), Error);
}

TEST_CASE("polar_decompose: rotations and SPD matrices pass through") {
  Eigen::Matrix2d rot = rotation2(0.7);
  PolarFactors pf = polar_decompose(rot);
  CHECK((pf.Q - rot).norm() <= 1e-12);
  CHECK((pf.S - Eigen::Matrix2d::Identity()).norm() <= 1e-12);

  Eigen::Matrix2d d = Eigen::Vector2d(2.0, 3.0).asDiagonal();
  PolarFactors pd = polar_decompose(d);
  CHECK((pd.Q - Eigen::Matrix2d::Identity()).norm() <= 1e-12);
  CHECK((pd.S - d).norm() <= 1e-12);
}

TEST_CASE("polar_decompose: composed factors recovered") {
  Eigen::Matrix2d rot = rotation2(M_PI / 6.0);
  Eigen::Matrix2d d = Eigen::Vector2d(2.0, 1.0).asDiagonal();
  PolarFactors pf = polar_decompose(rot * d);
  CHECK((pf.Q - rot).norm() <= 1e-10);
  CHECK((pf.S - d).norm() <= 1e-10);
}

TEST_CASE("polar_decompose: round trip on random and singular input") {
  for (int trial = 0; trial < 60; ++trial) {
    Rng rng = Rng::for_item(12, trial);
    const int n = 2 + trial % 3;
    Eigen::MatrixXd m = rng.normal_matrix(n, n);
    if (trial % 5 == 0) m.col(0).setZero();  // singular allowed
    PolarFactors pf = polar_decompose(m);
    CHECK((pf.Q * pf.S - m).norm() <= 1e-10 * (1.0 + m.norm()));
    CHECK((pf.Q.transpose() * pf.Q - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-10);
    SymEigen se = sym_eigen(pf.S);
    CHECK(se.eigenvalues[n - 1] >= -1e-10);
  }
}

TEST_CASE("dist_to_well: exact hits and closed forms") {
  WellProjection same = dist_to_well(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity());
  CHECK(same.distance == doctest::Approx(0.0).epsilon(1e-14));

  // M = diag(2,3) vs SO(2): nearest rotation is the identity
  Eigen::Matrix2d m = Eigen::Vector2d(2.0, 3.0).asDiagonal();
  WellProjection p = dist_to_well(m, Eigen::Matrix2d::Identity());
  CHECK(p.distance == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK((p.nearest - Eigen::Matrix2d::Identity()).norm() <= 1e-10);
  // cross-check against the dense angle grid
  CHECK(std::abs(p.distance - brute_force_dist2(m, Eigen::Matrix2d::Identity())) <= 1e-6);

  // |Q|_F = sqrt(n) for every orthogonal Q
  WellProjection z = dist_to_well(Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity());
  CHECK(z.distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("dist_to_well: SO(n) projection, never O(n)") {
  // reflection-like target: the best proper rotation stays at determinant +1
  Eigen::Matrix2d refl;
  refl << 1, 0, 0, -1;
  WellProjection p = dist_to_well(refl, Eigen::Matrix2d::Identity());
  CHECK(p.nearest.determinant() > 0.0);
  CHECK(std::abs(p.distance - brute_force_dist2(refl, Eigen::Matrix2d::Identity())) <= 1e-6);
}

TEST_CASE("dist_to_well: rejects singular wells") {
  Eigen::Matrix2d sing = Eigen::Matrix2d::Zero();
  CHECK_THROWS_AS(dist_to_well(Eigen::Matrix2d::Identity(), sing), Error);
}

TEST_CASE("dist_to_well: 2-D oracle equivalence on seeded cases") {
  for (int trial = 0; trial < 25; ++trial) {
    Rng rng = Rng::for_item(13, trial);
    Eigen::Matrix2d m = rng.normal_matrix(2, 2);
    Eigen::Matrix2d a = random_invertible(rng, 2);
    const double got = dist_to_well(m, a).distance;
    CHECK(std::abs(got - brute_force_dist2(m, a)) <= 1e-6);
  }
}

TEST_CASE("dist_to_well: 3-D analytic value is a lower envelope of sampling") {
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng = Rng::for_item(16, trial);
    Eigen::Matrix3d m = rng.normal_matrix(3, 3);
    Eigen::Matrix3d a = random_invertible(rng, 3);
    const double analytic = dist_to_well(m, a).distance;
    const double sampled = sampled_dist3(m, a, 1600 + trial, 100000);
    CHECK(analytic <= sampled + 1e-9);
  }
}

TEST_CASE("dist_to_well: orthogonal invariance and scaling covariance") {
  for (int trial = 0; trial < 40; ++trial) {
    Rng rng = Rng::for_item(14, trial);
    const int n = 2 + trial % 3;
    Eigen::MatrixXd m = rng.normal_matrix(n, n);
    Eigen::MatrixXd a = random_invertible(rng, n);
    Eigen::MatrixXd q = rng.rotation(n);
    const double base = dist_to_well(m, a).distance;
    CHECK(std::abs(dist_to_well(q * m, a).distance - base) <= 1e-10 * (1.0 + base));
    const double c = 0.1 + 3.0 * rng.uniform();
    CHECK(std::abs(dist_to_well(c * m, c * a).distance - c * base) <= 1e-10 * (1.0 + c * base));
  }
}

TEST_CASE("dist_to_family: argmin selection and tie-breaking") {
  WellFamily K(2, {Eigen::Matrix2d::Identity(), 2.0 * Eigen::Matrix2d::Identity()});

  FamilyProjection exact = dist_to_family(2.0 * Eigen::Matrix2d::Identity(), K);
  CHECK(exact.well_index == 1);
  CHECK(exact.distance == doctest::Approx(0.0).epsilon(1e-12));

  // M = 1.4 I: distance 0.4*sqrt2 to the identity well, 0.6*sqrt2 to 2I
  FamilyProjection mid = dist_to_family(1.4 * Eigen::Matrix2d::Identity(), K);
  CHECK(mid.distance == doctest::Approx(0.4 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(mid.well_index == 0);
  CHECK(std::abs(brute_force_dist2(1.4 * Eigen::Matrix2d::Identity(),
                                   Eigen::Matrix2d::Identity()) -
                 mid.distance) <= 1e-6);

  // inside the sigma tube the family distance is the single-well distance
  Eigen::Matrix2d near = Eigen::Matrix2d::Identity();
  near(0, 1) += K.sigma() / 4.0;
  FamilyProjection tube = dist_to_family(near, K);
  CHECK(tube.well_index == 0);
  CHECK(tube.distance ==
        doctest::Approx(dist_to_well(near, K.well(0)).distance).epsilon(1e-14));
}

TEST_CASE("nullspace: spans and deduplication") {
  Eigen::Vector3d e1(1, 0, 0);
  Eigen::MatrixXd ns = nullspace({e1}, 3);
  REQUIRE(ns.cols() == 2);
  CHECK(std::abs(ns.col(0)[0]) <= 1e-12);
  CHECK(std::abs(ns.col(1)[0]) <= 1e-12);
  CHECK((ns.transpose() * ns - Eigen::Matrix2d::Identity()).norm() <= 1e-12);

  Eigen::MatrixXd dup = nullspace({e1, e1}, 3);
  CHECK(dup.cols() == 2);

  Eigen::Vector3d v1(1, 1, 0), v2(0, 1, 1);
  Eigen::MatrixXd cross = nullspace({v1, v2}, 3);
  REQUIRE(cross.cols() == 1);
  Eigen::Vector3d expected = v1.cross(v2).normalized();  // (1,-1,1)/sqrt(3)
  CHECK(std::abs(std::abs(cross.col(0).dot(expected)) - 1.0) <= 1e-12);

  CHECK(nullspace({}, 3).cols() == 3);
}

TEST_CASE("nullspace: orthogonality against random inputs") {
  for (int trial = 0; trial < 30; ++trial) {
    Rng rng = Rng::for_item(15, trial);
    const int n = 2 + trial % 3;
    const int k = 1 + static_cast<int>(rng.uniform() * n);
    std::vector<Eigen::VectorXd> vs;
    for (int i = 0; i < k; ++i) vs.push_back(rng.normal_vector(n));
    Eigen::MatrixXd ns = nullspace(vs, n);
    for (const auto& v : vs)
      for (int c = 0; c < ns.cols(); ++c) CHECK(std::abs(v.dot(ns.col(c))) <= 1e-10 * v.norm());
  }
}
