#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "mrl/error.hpp"

namespace mrl {

/// Map u sampled on a uniform node grid over [-1,1]^n (n = 2 or 3) with a
/// mask selecting the nodes inside the open unit ball. Values are stored
/// node-major then component; node index runs row-major with the last axis
/// fastest. Immutable after generation.
struct GridField {
  int n = 2;
  int dims = 0;          // nodes per axis, >= 17
  double origin = -1.0;  // every axis
  double spacing = 0.0;  // h = 2 / (dims - 1)
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  std::int64_t node_count() const {
    std::int64_t c = 1;
    for (int d = 0; d < n; ++d) c *= dims;
    return c;
  }

  std::int64_t index(const std::array<int, 3>& idx) const {
    std::int64_t lin = 0;
    for (int d = 0; d < n; ++d) lin = lin * dims + idx[d];
    return lin;
  }

  std::array<int, 3> unindex(std::int64_t lin) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = n - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(lin % dims);
      lin /= dims;
    }
    return idx;
  }

  Eigen::VectorXd coord(const std::array<int, 3>& idx) const {
    Eigen::VectorXd x(n);
    for (int d = 0; d < n; ++d) x[d] = origin + spacing * idx[d];
    return x;
  }

  bool in_grid(const std::array<int, 3>& idx) const {
    for (int d = 0; d < n; ++d)
      if (idx[d] < 0 || idx[d] >= dims) return false;
    return true;
  }

  bool masked(std::int64_t lin) const { return mask[lin] != 0; }

  Eigen::VectorXd value(std::int64_t lin) const {
    Eigen::VectorXd v(n);
    for (int c = 0; c < n; ++c) v[c] = values[lin * n + c];
    return v;
  }

  void set_value(std::int64_t lin, const Eigen::VectorXd& v) {
    for (int c = 0; c < n; ++c) values[lin * n + c] = v[c];
  }

  /// Multilinear interpolation; x must stay a cell away from the grid edge.
  Eigen::VectorXd sample(const Eigen::VectorXd& x) const;
};

/// Empty field with mask = open unit ball. Throws BadParams for dims < 17
/// or n outside {2, 3}.
GridField make_grid(int n, int dims);

/// Per-node boolean set, always a subset of the owning field's mask.
struct GridSet {
  std::vector<std::uint8_t> member;

  bool contains(std::int64_t lin) const { return member[lin] != 0; }
  std::int64_t count() const {
    std::int64_t c = 0;
    for (auto m : member) c += m != 0;
    return c;
  }
};

/// Gradient (n x n per node, row-major) and Frobenius magnitude of all second
/// differences per node, on masked nodes. Central differences in the
/// interior, second-order one-sided at the mask boundary.
struct Jacobians {
  int n = 0;
  std::vector<double> grad;       // node-major, n*n row-major per node
  std::vector<double> hess_norm;  // per node

  Eigen::MatrixXd gradient(std::int64_t lin) const {
    Eigen::MatrixXd g(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) g(r, c) = grad[lin * n * n + r * n + c];
    return g;
  }
};

Jacobians differentiate(const GridField& f);

/// Multilinear interpolation of a per-node matrix field.
Eigen::MatrixXd sample_gradient(const GridField& f, const Jacobians& jac, const Eigen::VectorXd& x);

/// Faces between adjacent masked nodes with exactly one endpoint in the set,
/// times h^{n-1}. Faces against unmasked nodes do not count (relative
/// perimeter in the ball).
double discrete_perimeter(const GridField& f, const GridSet& set);

/// Node count times h^n.
double set_volume(const GridField& f, const GridSet& set);

/// Morphological dilation by one cell (all neighbors within Chebyshev
/// distance 1), clipped to the mask.
GridSet dilate(const GridField& f, const GridSet& set);

}  // namespace mrl
