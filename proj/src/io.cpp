#include "mrl/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mrl {

namespace fs = std::filesystem;

void write_text_atomic(const std::string& path, const std::string& text) {
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open for writing: " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::invalid_argument("short write: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n * n)
    throw std::invalid_argument("matrix: expected " + std::to_string(n * n) + " reals");
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = j.at(r * n + c).get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("vector: expected an array of reals");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

WellFamily wells_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  std::vector<Eigen::MatrixXd> wells;
  for (const auto& w : j.at("wells")) wells.push_back(matrix_from_json(w, n));
  return WellFamily(n, std::move(wells));
}

json wells_to_json(const WellFamily& K) {
  json out;
  out["n"] = K.dim();
  out["wells"] = json::array();
  for (int i = 0; i < K.size(); ++i) out["wells"].push_back(matrix_to_json(K.well(i)));
  return out;
}

WellFamily load_wells(const std::string& path) {
  return wells_from_json(json::parse(read_text(path)));
}

PointCorrespondence points_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  Eigen::MatrixXd A = matrix_from_json(j.at("A"), n);
  std::vector<Eigen::VectorXd> z, zeta;
  for (const auto& p : j.at("z")) z.push_back(vector_from_json(p));
  for (const auto& p : j.at("zeta")) zeta.push_back(vector_from_json(p));
  return PointCorrespondence(n, std::move(z), std::move(zeta), std::move(A));
}

json recovered_to_json(const PointCorrespondence& pc, const RecoveredMap& rec) {
  json out;
  out["format_version"] = kFormatVersion;
  out["n"] = pc.n;
  out["b"] = pc.b;
  out["distortion"] = pc.distortion();
  out["O"] = matrix_to_json(rec.map.O);
  out["t"] = vector_to_json(rec.map.t);
  out["residual"] = rec.residual;
  out["det_O_Ainv"] = (rec.map.O * pc.A.inverse()).determinant();
  return out;
}

namespace {

json direction_to_json(const std::optional<Direction>& d) {
  if (!d) return nullptr;
  json out;
  out["v"] = vector_to_json(d->v);
  out["margin"] = d->margin;
  return out;
}

}  // namespace

json compat_to_json(const CompatibilityReport& rep) {
  json out;
  out["format_version"] = kFormatVersion;
  out["n"] = rep.n;
  out["m"] = rep.m;
  out["sigma"] = rep.sigma;
  out["seed"] = rep.seed;
  out["edges"] = json::array();
  for (const auto& e : rep.edges) {
    json je;
    je["i"] = e.i;
    je["j"] = e.j;
    je["p"] = vector_to_json(e.vectors.p);
    je["q"] = vector_to_json(e.vectors.q);
    je["witness_X"] = matrix_to_json(e.witness.X);
    je["witness_Y"] = matrix_to_json(e.witness.Y);
    je["a"] = vector_to_json(e.witness.a);
    je["b"] = vector_to_json(e.witness.b);
    out["edges"].push_back(je);
  }
  out["connected"] = rep.connected;
  out["spanning_tree"] = json::array();
  for (const auto& [a, b] : rep.spanning_tree) out["spanning_tree"].push_back({a, b});
  out["generic"] = rep.generic ? json(*rep.generic) : json(nullptr);
  out["directions_h1"] = json::array();
  out["directions_h2"] = json::array();
  out["constructive"] = json::array();
  for (int i = 0; i < rep.m; ++i) {
    out["directions_h1"].push_back(direction_to_json(rep.directions_h1[i]));
    out["directions_h2"].push_back(direction_to_json(rep.directions_h2[i]));
    out["constructive"].push_back(direction_to_json(rep.constructive[i]));
  }
  out["dichotomy_ok"] = rep.dichotomy_ok ? json(*rep.dichotomy_ok) : json(nullptr);
  return out;
}

json energy_to_json(const EnergyBreakdown& e) {
  json out;
  out["format_version"] = kFormatVersion;
  out["sigma_param"] = e.sigma_param;
  out["p"] = e.p;
  out["q"] = e.q;
  out["first_term"] = e.first_term;
  out["second_term"] = e.second_term;
  out["total"] = e.total;
  out["epsilon"] = e.epsilon;
  return out;
}

json majority_to_json(const GridField& f, const MajorityPhase& mp) {
  json out;
  out["format_version"] = kFormatVersion;
  out["index"] = mp.index;
  out["alpha"] = mp.alpha;
  out["perimeter"] = mp.perimeter;
  out["volume_fraction"] = mp.volume_fraction;
  out["complement_volume"] = (1.0 - mp.volume_fraction) * set_volume(f, full_region(f));
  out["tie"] = mp.tie;
  return out;
}

json pairs_to_json(const PairStats& ps) {
  json out;
  out["format_version"] = kFormatVersion;
  out["count"] = ps.count;
  out["seed"] = ps.seed;
  out["epsilon"] = ps.epsilon;
  out["threshold"] = ps.threshold;
  out["quantile_levels"] = {1, 5, 25, 50, 75, 95, 99};
  out["quantiles"] = ps.quantiles;
  out["abs_quantiles"] = ps.abs_quantiles;
  out["violating_fraction"] = ps.violating_fraction;
  return out;
}

json truncation_to_json(const TruncationResult& tr, double lambda) {
  json out;
  out["format_version"] = kFormatVersion;
  out["lambda"] = lambda;
  out["dw_sup"] = tr.dw_sup;
  out["bad_volume"] = tr.bad_volume;
  out["bad_dilated_volume"] = tr.bad_dilated_volume;
  out["bad_dilated_perimeter"] = tr.bad_dilated_perimeter;
  out["diff_lq"] = tr.diff_lq;
  out["tail_lq"] = tr.tail_lq;
  return out;
}

json scaling_to_json(const ScalingReport& rep) {
  json out;
  out["format_version"] = kFormatVersion;
  out["seed"] = rep.seed;
  out["N"] = rep.N;
  out["p"] = rep.p;
  out["q"] = rep.q;
  out["omega_radius"] = rep.omega_radius;
  out["majority"] = rep.majority;
  out["entries"] = json::array();
  for (const auto& e : rep.entries) {
    json je;
    je["sigma"] = e.sigma;
    je["a_meas"] = e.a_meas;
    je["err"] = e.err;
    je["over_budget"] = e.over_budget;
    out["entries"].push_back(je);
  }
  out["degenerate"] = rep.degenerate;
  if (!rep.degenerate) {
    out["slope"] = rep.slope;
    out["intercept"] = rep.intercept;
  } else {
    out["slope"] = nullptr;
    out["intercept"] = nullptr;
  }
  out["audit_target"] = rep.audit_target;
  out["audit_max_ratio"] = rep.audit_max_ratio;
  return out;
}

namespace {

json mask_rle(const std::vector<std::uint8_t>& mask) {
  json runs = json::array();
  std::int64_t i = 0;
  std::uint8_t current = 0;  // runs alternate starting with outside
  const auto total = static_cast<std::int64_t>(mask.size());
  while (i < total) {
    std::int64_t len = 0;
    while (i + len < total && (mask[i + len] != 0) == (current != 0)) ++len;
    runs.push_back(len);
    i += len;
    current = current ? 0 : 1;
  }
  return runs;
}

std::vector<std::uint8_t> mask_from_rle(const json& runs, std::int64_t total) {
  std::vector<std::uint8_t> mask;
  mask.reserve(total);
  std::uint8_t current = 0;
  for (const auto& r : runs) {
    const auto len = r.get<std::int64_t>();
    mask.insert(mask.end(), len, current);
    current = current ? 0 : 1;
  }
  if (static_cast<std::int64_t>(mask.size()) != total)
    throw std::invalid_argument("field mask: run lengths do not cover the grid");
  return mask;
}

}  // namespace

void write_field(const GridField& f, const std::string& stem) {
  json header;
  header["format_version"] = kFormatVersion;
  header["n"] = f.n;
  header["dims"] = f.dims;
  header["origin"] = f.origin;
  header["spacing"] = f.spacing;
  header["data_file"] = fs::path(stem).filename().string() + ".field.bin";
  header["order"] = "row-major, node-major then component";
  header["dtype"] = "little-endian IEEE-754 binary64";
  header["mask"] = mask_rle(f.mask);
  write_text_atomic(stem + ".field.json", header.dump(2) + "\n");

  std::string blob(reinterpret_cast<const char*>(f.values.data()),
                   f.values.size() * sizeof(double));
  write_text_atomic(stem + ".field.bin", blob);
}

GridField read_field(const std::string& stem) {
  json header = json::parse(read_text(stem + ".field.json"));
  if (header.at("format_version").get<int>() != kFormatVersion)
    throw std::invalid_argument("field header: unsupported format_version");

  GridField f;
  f.n = header.at("n").get<int>();
  f.dims = header.at("dims").get<int>();
  f.origin = header.at("origin").get<double>();
  f.spacing = header.at("spacing").get<double>();
  if ((f.n != 2 && f.n != 3) || f.dims < 17)
    throw std::invalid_argument("field header: bad n or dims");
  f.mask = mask_from_rle(header.at("mask"), f.node_count());

  const fs::path bin = fs::path(stem).parent_path() / header.at("data_file").get<std::string>();
  std::string blob = read_text(bin.string());
  const std::size_t expect = static_cast<std::size_t>(f.node_count()) * f.n * sizeof(double);
  if (blob.size() != expect)
    throw std::invalid_argument("field data: size mismatch with header");
  f.values.resize(f.node_count() * f.n);
  std::memcpy(f.values.data(), blob.data(), expect);

  for (std::int64_t lin = 0; lin < f.node_count(); ++lin)
    if (f.masked(lin))
      for (int c = 0; c < f.n; ++c)
        if (!std::isfinite(f.values[lin * f.n + c]))
          throw std::invalid_argument("field data: non-finite value on a masked node");
  return f;
}

}  // namespace mrl
