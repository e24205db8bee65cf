#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrl/field.hpp"
#include "mrl/wells.hpp"

namespace mrl {

struct AffineSpec {
  Eigen::MatrixXd R;
};

/// Sawtooth profile between the rank-1 witnesses of wells i and j: phase X
/// on a theta fraction of each period, phase Y on the rest, transitions
/// mollified at width `width` (>= 4h).
struct LaminateSpec {
  int i = 0;
  int j = 1;
  double theta = 0.5;
  double period = 0.5;
  double width = 0.05;
};

/// Single band of phase X of the given thickness inside a slab of cross
/// extent `extent` centered at `center` (measured along the lamina normal).
struct LaminaSpec {
  int i = 0;
  int j = 1;
  double thickness = 0.1;
  double extent = 1.0;
  double width = 0.05;
  double center = 0.0;
};

/// Continuous piecewise-affine map with four gradients: identity outside an
/// equilateral triangle of diameter ell, I + a n_i^T on the three central
/// subtriangles. Two-dimensional only; mollified in 2-D at width `width`.
struct Counterexample4Spec {
  double ell = 0.5;
  double width = 0.03;
  Eigen::Vector2d amp{0.9, 0.4};
};

struct PerturbedSpec {
  Eigen::MatrixXd R;
  double amplitude = 0.01;
  double wavelength = 0.5;
};

struct GenResult {
  GridField field;
  // ground truth of the construction, for tests and reports
  Eigen::MatrixXd X, Y;  // laminate/lamina phase gradients
  Eigen::VectorXd a, b;  // rank-1 jump X - Y = a b^T
  std::vector<Eigen::MatrixXd> gradients;  // counterexample4 pieces (A_1..A_4)
  std::vector<double> kinks;               // profile kink positions along the normal
};

GenResult gen_affine(const AffineSpec& spec, int N);
GenResult gen_laminate(const WellFamily& K, const LaminateSpec& spec, int N);
GenResult gen_lamina(const WellFamily& K, const LaminaSpec& spec, int N);
GenResult gen_counterexample4(const Counterexample4Spec& spec, int N);
GenResult gen_perturbed(const PerturbedSpec& spec, int N, std::uint64_t seed);

/// String-keyed front end used by the CLI: kind + k=v parameters. Unknown
/// keys are errors. Wells are required for laminate/lamina kinds.
struct GenConfig {
  std::string kind;
  std::map<std::string, std::vector<double>> params;
  int N = 65;
  std::uint64_t seed = 0;
};

GenResult generate(const GenConfig& cfg, const std::optional<WellFamily>& wells);

/// Standard bump on [-width, width], normalized by the same symmetric
/// midpoint rule used for evaluation, so constants and affine profiles are
/// reproduced exactly.
class Mollifier1D {
public:
  Mollifier1D(double width, int quad_points = 512);
  /// Convolution against an arbitrary profile.
  double operator()(const std::function<double(double)>& profile, double s) const;
  double width() const { return width_; }

private:
  double width_;
  std::vector<double> offsets_;
  std::vector<double> weights_;
};

}  // namespace mrl
