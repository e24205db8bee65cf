#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrl/generators.hpp"
#include "mrl/wells.hpp"

namespace mrl {

/// Family of fields parameterized by varsigma. The default lamina family
/// keeps the mollification width at the resolution floor and shrinks the
/// band thickness like t0 * vs^{1/p}; "affine" is the degenerate pure-phase
/// family.
struct ScalingConfig {
  std::string family = "lamina";
  int N = 129;
  double p = 1.0;
  double q = 1.0;
  std::vector<double> sigmas;  // empty = default 2^-4 .. 2^-9
  double omega_radius = 0.5;
  double t0 = 1.0;
  double extent = 2.0;
  double width = 0.0;     // mollify width; 0 = max(4h, 1/16)
  int i = 0;              // band phase well
  int j = 1;              // background phase well
  double a_budget = 0.0;  // 0 = 3x the first member's energy
  std::uint64_t seed = 0;
};

struct ScalingEntry {
  double sigma = 0.0;
  double a_meas = 0.0;
  double err = 0.0;
  bool over_budget = false;
};

struct ScalingReport {
  std::vector<ScalingEntry> entries;
  double slope = 0.0;
  double intercept = 0.0;
  bool degenerate = false;  // err vanished somewhere; slope not meaningful
  double omega_radius = 0.0;
  double p = 1.0, q = 1.0;
  int N = 0;
  int majority = -1;
  double audit_target = 0.0;     // first member's energy
  double audit_max_ratio = 0.0;  // worst total / target deviation factor
  std::uint64_t seed = 0;
};

/// inf over R in SO(n)A of the p-mean gradient misfit on the nodes inside
/// B_radius: closed-form Procrustes on the mean gradient for p = 2, descent
/// over rotations seeded there for other p.
double gradient_misfit(const GridField& f, const Jacobians& jac, const Eigen::MatrixXd& A,
                       double p, double radius);

ScalingReport scaling_experiment(const WellFamily& K, const ScalingConfig& cfg);

}  // namespace mrl
