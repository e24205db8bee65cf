#include "mrl/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mrl/parallel.hpp"
#include "mrl/rng.hpp"

namespace mrl {

namespace {

double bump(double t) {  // support (-1, 1)
  const double r2 = t * t;
  return r2 < 1.0 ? std::exp(1.0 / (r2 - 1.0)) : 0.0;
}

void require_width(double width, double h) {
  if (!(width >= 4.0 * h))
    throw Error(ErrorCode::BadParams, "generator: mollify width must be at least 4h");
}

}  // namespace

Mollifier1D::Mollifier1D(double width, int quad_points) : width_(width) {
  offsets_.resize(quad_points);
  weights_.resize(quad_points);
  const double step = 2.0 * width / quad_points;
  double total = 0.0;
  for (int k = 0; k < quad_points; ++k) {
    offsets_[k] = -width + (k + 0.5) * step;
    weights_[k] = bump(offsets_[k] / width);
    total += weights_[k];
  }
  for (auto& w : weights_) w /= total;
}

double Mollifier1D::operator()(const std::function<double(double)>& profile, double s) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < offsets_.size(); ++k) acc += weights_[k] * profile(s - offsets_[k]);
  return acc;
}

GenResult gen_affine(const AffineSpec& spec, int N) {
  const int n = static_cast<int>(spec.R.rows());
  GenResult out;
  out.field = make_grid(n, N);
  GridField& f = out.field;
  parallel_for(f.node_count(), [&](std::int64_t lin) {
    f.set_value(lin, spec.R * f.coord(f.unindex(lin)));
  });
  out.X = spec.R;
  return out;
}

namespace {

// u(x) = Y x + a |b| phi_m(x . bhat) for a unit-slope profile phi, so the
// gradient is exactly X on ramps and Y on flats (off the mollified layers).
GenResult profile_field(const WellFamily& K, int i, int j, int N, double width,
                        const std::function<double(double)>& unit_profile,
                        std::vector<double> kinks) {
  auto conn = rank1_connect(K.well(i), K.well(j));
  if (!conn || conn->zero())
    throw Error(ErrorCode::NotConnected, "generator: wells are not rank-1 connected");
  Rank1Witness w = rank1_witness(K.well(i), K.well(j));

  GenResult out;
  out.field = make_grid(K.dim(), N);
  GridField& f = out.field;
  require_width(width, f.spacing);

  Mollifier1D moll(width);
  const double bnorm = w.b.norm();
  Eigen::VectorXd bhat = w.b / bnorm;
  parallel_for(f.node_count(), [&](std::int64_t lin) {
    Eigen::VectorXd x = f.coord(f.unindex(lin));
    f.set_value(lin, w.Y * x + w.a * (bnorm * moll(unit_profile, x.dot(bhat))));
  });

  out.X = w.X;
  out.Y = w.Y;
  out.a = w.a;
  out.b = w.b;
  out.kinks = std::move(kinks);
  return out;
}

}  // namespace

GenResult gen_laminate(const WellFamily& K, const LaminateSpec& spec, int N) {
  if (!(spec.theta > 0.0 && spec.theta < 1.0) || !(spec.period > 0.0))
    throw Error(ErrorCode::BadParams, "laminate: need theta in (0,1) and period > 0");

  const double period = spec.period;
  const double theta = spec.theta;
  const double start = -2.0;
  auto raw = [=](double s) {
    const double r = s - start;
    const double full = std::floor(r / period);
    const double rem = r - full * period;
    return full * theta * period + std::min(rem, theta * period);
  };
  // centered so the image of the origin stays near the origin
  auto staircase = [=](double s) { return raw(s) - raw(0.0); };

  std::vector<double> kinks;
  for (double s = start; s < 2.0 + period; s += period) {
    kinks.push_back(s);
    kinks.push_back(s + theta * period);
  }
  return profile_field(K, spec.i, spec.j, N, spec.width, staircase, std::move(kinks));
}

GenResult gen_lamina(const WellFamily& K, const LaminaSpec& spec, int N) {
  if (!(spec.thickness > 0.0) || !(spec.extent > 0.0))
    throw Error(ErrorCode::BadParams, "lamina: need positive thickness and extent");
  if (spec.thickness > spec.extent)
    throw Error(ErrorCode::BadParams, "lamina: thickness exceeds the slab extent");

  const double lo = spec.center - spec.thickness / 2.0;
  const double hi = spec.center + spec.thickness / 2.0;
  auto ramp = [=](double s) { return std::clamp(s - lo, 0.0, hi - lo); };
  return profile_field(K, spec.i, spec.j, N, spec.width, ramp, {lo, hi});
}

GenResult gen_counterexample4(const Counterexample4Spec& spec, int N) {
  if (!(spec.ell > 0.0) || spec.ell > 1.2)
    throw Error(ErrorCode::BadParams, "counterexample4: diameter out of range");

  GenResult out;
  out.field = make_grid(2, N);
  GridField& f = out.field;
  require_width(spec.width, f.spacing);

  // equilateral triangle of side ell centered at the origin
  const double circum = spec.ell / std::sqrt(3.0);
  const double inr = spec.ell / (2.0 * std::sqrt(3.0));
  std::vector<Eigen::Vector2d> normals;
  for (int k = 0; k < 3; ++k) {
    const double ang = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
    Eigen::Vector2d vertex(circum * std::cos(ang), circum * std::sin(ang));
    normals.push_back(-vertex / circum);
  }

  // u_0(x) = x + amp * psi(x); psi piecewise affine, zero outside the triangle
  auto psi = [&](const Eigen::Vector2d& x) {
    double m = normals[0].dot(x);
    for (int k = 1; k < 3; ++k) m = std::max(m, normals[k].dot(x));
    return std::min(m - inr, 0.0);
  };

  // 2-D radial bump quadrature, normalized on the same symmetric grid
  const int q = 24;
  const double step = 2.0 * spec.width / q;
  std::vector<Eigen::Vector2d> offs;
  std::vector<double> wts;
  double total = 0.0;
  for (int ky = 0; ky < q; ++ky) {
    for (int kx = 0; kx < q; ++kx) {
      Eigen::Vector2d y(-spec.width + (kx + 0.5) * step, -spec.width + (ky + 0.5) * step);
      const double w = bump(y.norm() / spec.width);
      if (w <= 0.0) continue;
      offs.push_back(y);
      wts.push_back(w);
      total += w;
    }
  }
  for (auto& w : wts) w /= total;

  parallel_for(f.node_count(), [&](std::int64_t lin) {
    Eigen::Vector2d x = f.coord(f.unindex(lin));
    double acc = 0.0;
    for (std::size_t k = 0; k < offs.size(); ++k) acc += wts[k] * psi(x - offs[k]);
    Eigen::Vector2d u = x + spec.amp * acc;
    f.set_value(lin, u);
  });

  for (int k = 0; k < 3; ++k)
    out.gradients.push_back(Eigen::Matrix2d(Eigen::Matrix2d::Identity() +
                                            spec.amp * normals[k].transpose()));
  out.gradients.push_back(Eigen::Matrix2d::Identity());
  return out;
}

GenResult gen_perturbed(const PerturbedSpec& spec, int N, std::uint64_t seed) {
  const int n = static_cast<int>(spec.R.rows());
  if (!(spec.wavelength > 0.0))
    throw Error(ErrorCode::BadParams, "perturbed: wavelength must be positive");

  GenResult out;
  out.field = make_grid(n, N);
  GridField& f = out.field;

  std::vector<Eigen::VectorXd> waves(n);
  std::vector<double> phases(n);
  for (int c = 0; c < n; ++c) {
    Rng rng = Rng::for_item(seed, c);
    waves[c] = rng.unit_vector(n);
    phases[c] = rng.uniform(0.0, 2.0 * M_PI);
  }
  parallel_for(f.node_count(), [&](std::int64_t lin) {
    Eigen::VectorXd x = f.coord(f.unindex(lin));
    Eigen::VectorXd u = spec.R * x;
    for (int c = 0; c < n; ++c)
      u[c] += spec.amplitude * std::sin(2.0 * M_PI * waves[c].dot(x) / spec.wavelength + phases[c]);
    f.set_value(lin, u);
  });
  out.X = spec.R;
  return out;
}

namespace {

double scalar_param(const GenConfig& cfg, const std::string& key,
                    std::optional<double> fallback = {}) {
  auto it = cfg.params.find(key);
  if (it == cfg.params.end()) {
    if (fallback) return *fallback;
    throw std::invalid_argument("generator: missing parameter '" + key + "'");
  }
  if (it->second.size() != 1)
    throw std::invalid_argument("generator: parameter '" + key + "' must be a scalar");
  return it->second.front();
}

Eigen::MatrixXd matrix_param(const GenConfig& cfg, const std::string& key) {
  auto it = cfg.params.find(key);
  if (it == cfg.params.end())
    throw std::invalid_argument("generator: missing parameter '" + key + "'");
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(it->second.size()))));
  if (n * n != static_cast<int>(it->second.size()))
    throw std::invalid_argument("generator: parameter '" + key + "' must be a square matrix");
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = it->second[r * n + c];
  return m;
}

void check_keys(const GenConfig& cfg, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : cfg.params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument("generator: unknown parameter '" + key + "'");
  }
}

}  // namespace

GenResult generate(const GenConfig& cfg, const std::optional<WellFamily>& wells) {
  auto need_wells = [&]() -> const WellFamily& {
    if (!wells) throw std::invalid_argument("generator: this kind requires a well family");
    return *wells;
  };

  if (cfg.kind == "affine") {
    check_keys(cfg, {"R"});
    return gen_affine({matrix_param(cfg, "R")}, cfg.N);
  }
  if (cfg.kind == "laminate") {
    check_keys(cfg, {"i", "j", "theta", "period", "width"});
    LaminateSpec s;
    s.i = static_cast<int>(scalar_param(cfg, "i", 0.0));
    s.j = static_cast<int>(scalar_param(cfg, "j", 1.0));
    s.theta = scalar_param(cfg, "theta", 0.5);
    s.period = scalar_param(cfg, "period", 0.5);
    s.width = scalar_param(cfg, "width", 0.05);
    return gen_laminate(need_wells(), s, cfg.N);
  }
  if (cfg.kind == "lamina") {
    check_keys(cfg, {"i", "j", "thickness", "extent", "width", "center"});
    LaminaSpec s;
    s.i = static_cast<int>(scalar_param(cfg, "i", 0.0));
    s.j = static_cast<int>(scalar_param(cfg, "j", 1.0));
    s.thickness = scalar_param(cfg, "thickness", 0.1);
    s.extent = scalar_param(cfg, "extent", 1.0);
    s.width = scalar_param(cfg, "width", 0.05);
    s.center = scalar_param(cfg, "center", 0.0);
    return gen_lamina(need_wells(), s, cfg.N);
  }
  if (cfg.kind == "counterexample4") {
    check_keys(cfg, {"ell", "width", "ax", "ay"});
    Counterexample4Spec s;
    s.ell = scalar_param(cfg, "ell", 0.5);
    s.width = scalar_param(cfg, "width", 0.03);
    s.amp = Eigen::Vector2d(scalar_param(cfg, "ax", 0.9), scalar_param(cfg, "ay", 0.4));
    return gen_counterexample4(s, cfg.N);
  }
  if (cfg.kind == "perturbed") {
    check_keys(cfg, {"R", "amplitude", "wavelength"});
    PerturbedSpec s;
    s.R = matrix_param(cfg, "R");
    s.amplitude = scalar_param(cfg, "amplitude", 0.01);
    s.wavelength = scalar_param(cfg, "wavelength", 0.5);
    return gen_perturbed(s, cfg.N, cfg.seed);
  }
  throw std::invalid_argument("generator: unknown kind '" + cfg.kind + "'");
}

}  // namespace mrl
