#include "mrl/field.hpp"

#include <algorithm>
#include <cmath>

#include "mrl/parallel.hpp"

namespace mrl {

GridField make_grid(int n, int dims) {
  if (n != 2 && n != 3)
    throw Error(ErrorCode::BadParams, "make_grid: dimension must be 2 or 3");
  if (dims < 17)
    throw Error(ErrorCode::BadParams, "make_grid: need at least 17 nodes per axis");

  GridField f;
  f.n = n;
  f.dims = dims;
  f.origin = -1.0;
  f.spacing = 2.0 / (dims - 1);
  f.values.assign(f.node_count() * n, 0.0);
  f.mask.assign(f.node_count(), 0);
  for (std::int64_t lin = 0; lin < f.node_count(); ++lin)
    f.mask[lin] = f.coord(f.unindex(lin)).norm() < 1.0 - 1e-12 ? 1 : 0;
  return f;
}

Eigen::VectorXd GridField::sample(const Eigen::VectorXd& x) const {
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int d = 0; d < n; ++d) {
    double t = (x[d] - origin) / spacing;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, dims - 2);
    base[d] = i;
    frac[d] = std::clamp(t - i, 0.0, 1.0);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    std::array<int, 3> idx = base;
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const int bit = (c >> d) & 1;
      idx[d] += bit;
      w *= bit ? frac[d] : 1.0 - frac[d];
    }
    out += w * value(index(idx));
  }
  return out;
}

namespace {

// one derivative along axis d of component values accessed through eval
template <class Eval>
double derivative(const GridField& f, const std::array<int, 3>& idx, int d, Eval&& eval) {
  const double h = f.spacing;
  auto shifted = [&](int step) {
    std::array<int, 3> s = idx;
    s[d] += step;
    return s;
  };
  auto ok = [&](int step) {
    std::array<int, 3> s = shifted(step);
    return f.in_grid(s) && f.masked(f.index(s));
  };

  if (ok(1) && ok(-1)) return (eval(shifted(1)) - eval(shifted(-1))) / (2.0 * h);
  if (ok(1) && ok(2)) return (-3.0 * eval(idx) + 4.0 * eval(shifted(1)) - eval(shifted(2))) / (2.0 * h);
  if (ok(-1) && ok(-2)) return (3.0 * eval(idx) - 4.0 * eval(shifted(-1)) + eval(shifted(-2))) / (2.0 * h);
  if (ok(1)) return (eval(shifted(1)) - eval(idx)) / h;
  if (ok(-1)) return (eval(idx) - eval(shifted(-1))) / h;
  return 0.0;
}

}  // namespace

Jacobians differentiate(const GridField& f) {
  const int n = f.n;
  Jacobians out;
  out.n = n;
  out.grad.assign(f.node_count() * n * n, 0.0);
  out.hess_norm.assign(f.node_count(), 0.0);

  parallel_for(f.node_count(), [&](std::int64_t lin) {
    if (!f.masked(lin)) return;
    const auto idx = f.unindex(lin);
    for (int c = 0; c < n; ++c)
      for (int d = 0; d < n; ++d)
        out.grad[lin * n * n + c * n + d] = derivative(
            f, idx, d, [&](const std::array<int, 3>& at) { return f.values[f.index(at) * n + c]; });
  });

  // second differences as first differences of the gradient field
  parallel_for(f.node_count(), [&](std::int64_t lin) {
    if (!f.masked(lin)) return;
    const auto idx = f.unindex(lin);
    double sq = 0.0;
    for (int c = 0; c < n; ++c)
      for (int d = 0; d < n; ++d)
        for (int e = 0; e < n; ++e) {
          double v = derivative(f, idx, e, [&](const std::array<int, 3>& at) {
            return out.grad[f.index(at) * n * n + c * n + d];
          });
          sq += v * v;
        }
    out.hess_norm[lin] = std::sqrt(sq);
  });
  return out;
}

Eigen::MatrixXd sample_gradient(const GridField& f, const Jacobians& jac, const Eigen::VectorXd& x) {
  const int n = f.n;
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int d = 0; d < n; ++d) {
    double t = (x[d] - f.origin) / f.spacing;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, f.dims - 2);
    base[d] = i;
    frac[d] = std::clamp(t - i, 0.0, 1.0);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < (1 << n); ++c) {
    std::array<int, 3> idx = base;
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const int bit = (c >> d) & 1;
      idx[d] += bit;
      w *= bit ? frac[d] : 1.0 - frac[d];
    }
    out += w * jac.gradient(f.index(idx));
  }
  return out;
}

double discrete_perimeter(const GridField& f, const GridSet& set) {
  std::int64_t faces = 0;
  for (std::int64_t lin = 0; lin < f.node_count(); ++lin) {
    if (!f.masked(lin)) continue;
    const auto idx = f.unindex(lin);
    for (int d = 0; d < f.n; ++d) {
      std::array<int, 3> nb = idx;
      nb[d] += 1;
      if (!f.in_grid(nb)) continue;
      const std::int64_t nlin = f.index(nb);
      if (!f.masked(nlin)) continue;
      if (set.contains(lin) != set.contains(nlin)) ++faces;
    }
  }
  return faces * std::pow(f.spacing, f.n - 1);
}

double set_volume(const GridField& f, const GridSet& set) {
  return set.count() * std::pow(f.spacing, f.n);
}

GridSet dilate(const GridField& f, const GridSet& set) {
  GridSet out;
  out.member.assign(f.node_count(), 0);
  for (std::int64_t lin = 0; lin < f.node_count(); ++lin) {
    if (!set.contains(lin)) continue;
    const auto idx = f.unindex(lin);
    std::array<int, 3> nb;
    const int span = f.n == 2 ? 9 : 27;
    for (int s = 0; s < span; ++s) {
      int code = s;
      bool inside = true;
      for (int d = 0; d < f.n; ++d) {
        nb[d] = idx[d] + (code % 3) - 1;
        code /= 3;
        inside = inside && nb[d] >= 0 && nb[d] < f.dims;
      }
      if (!inside) continue;
      const std::int64_t nlin = f.index(nb);
      if (f.masked(nlin)) out.member[nlin] = 1;
    }
  }
  return out;
}

}  // namespace mrl
