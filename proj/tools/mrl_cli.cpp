// mrl: multiwell rigidity lab command line.
//
// Subcommands: wells analyze|connect, field gen|energy|majority|pairs|
// truncate|degree, scaling run, register. All reports are JSON and embed
// the resolved configuration plus the seed; field data goes to
// <stem>.field.json / <stem>.field.bin. Exit codes: 0 success, 1 input
// error, 2 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "mrl/analysis.hpp"
#include "mrl/generators.hpp"
#include "mrl/io.hpp"
#include "mrl/scaling.hpp"

namespace {

using mrl::json;

void emit(const std::string& path, json report) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty() || path == "-")
    std::cout << text;
  else
    mrl::write_text_atomic(path, text);
}

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw std::invalid_argument("no such file: " + path);
}

std::map<std::string, std::vector<double>> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    std::vector<double> vals;
    std::string rest = kv.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto colon = rest.find(':', pos);
      const std::string tok =
          rest.substr(pos, colon == std::string::npos ? rest.size() - pos : colon - pos);
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::invalid_argument("--param " + key + ": '" + tok + "' is not a number");
      }
      if (colon == std::string::npos) break;
      pos = colon + 1;
    }
    if (out.count(key)) throw std::invalid_argument("--param " + key + " given twice");
    out[key] = vals;
  }
  return out;
}

json params_to_json(const std::map<std::string, std::vector<double>>& params) {
  json out = json::object();
  for (const auto& [k, v] : params) out[k] = v.size() == 1 ? json(v.front()) : json(v);
  return out;
}

// resolve the majority phase when the caller did not pin it
int resolve_majority(const mrl::GridField& f, const mrl::Jacobians& jac, const mrl::WellFamily& K,
                     int requested, double p, double q) {
  if (requested >= 0) {
    if (requested >= K.size()) throw std::invalid_argument("--majority out of range");
    return requested;
  }
  return mrl::majority_phase(f, jac, K, p, q).index;
}

int run(int argc, char** argv) {
  CLI::App app{"multiwell rigidity lab"};
  app.require_subcommand(1);

  // ---- wells ----
  auto* wells_cmd = app.add_subcommand("wells", "well-family analysis");
  wells_cmd->require_subcommand(1);
  std::string wells_in, wells_out;
  std::uint64_t wells_seed = 0;
  for (const char* name : {"analyze", "connect"}) {
    auto* sub = wells_cmd->add_subcommand(name);
    sub->add_option("--in", wells_in, "wells JSON")->required();
    sub->add_option("--seed", wells_seed, "search seed");
    sub->add_option("--out", wells_out, "report path (default stdout)");
  }

  // ---- field ----
  auto* field_cmd = app.add_subcommand("field", "grid-field experiments");
  field_cmd->require_subcommand(1);

  std::string gen_kind, gen_out;
  std::vector<std::string> gen_params;
  std::string gen_wells;
  int gen_n = 65;
  std::uint64_t gen_seed = 0;
  auto* gen_sub = field_cmd->add_subcommand("gen", "generate a field");
  gen_sub->add_option("--kind", gen_kind, "affine|laminate|lamina|counterexample4|perturbed")
      ->required();
  gen_sub->add_option("--param", gen_params, "generator parameter key=value (vectors use ':')");
  gen_sub->add_option("--wells", gen_wells, "wells JSON (laminate/lamina)");
  gen_sub->add_option("--N", gen_n, "nodes per axis");
  gen_sub->add_option("--seed", gen_seed, "generator seed");
  gen_sub->add_option("--out", gen_out, "output stem")->required();

  std::string an_field, an_wells, an_out;
  double an_sigma = 0.0625, an_p = 2.0, an_q = 1.0;
  auto* energy_sub = field_cmd->add_subcommand("energy", "two-term energy of a field");
  auto* majority_sub = field_cmd->add_subcommand("majority", "majority phase detection");
  for (auto* sub : {energy_sub, majority_sub}) {
    sub->add_option("--field", an_field, "field stem")->required();
    sub->add_option("--wells", an_wells, "wells JSON")->required();
    sub->add_option("--p", an_p, "first exponent");
    sub->add_option("--q", an_q, "second exponent");
    sub->add_option("--out", an_out, "report path (default stdout)");
  }
  energy_sub->add_option("--sigma", an_sigma, "varsigma in (0,1]");

  std::string pr_field, pr_wells, pr_out;
  int pr_majority = -1;
  double pr_eps = 0.0, pr_c = 10.0, pr_radius = 0.8, pr_p = 2.0, pr_q = 1.0, pr_sigma = 0.0625;
  std::int64_t pr_pairs = 20000;
  std::uint64_t pr_seed = 0;
  auto* pairs_sub = field_cmd->add_subcommand("pairs", "two-point stretch statistics");
  pairs_sub->add_option("--field", pr_field)->required();
  pairs_sub->add_option("--wells", pr_wells)->required();
  pairs_sub->add_option("--majority", pr_majority, "majority well (-1 = detect)");
  pairs_sub->add_option("--epsilon", pr_eps, "scale (0 = sigma^{1/p})");
  pairs_sub->add_option("--sigma", pr_sigma, "varsigma used when epsilon = 0");
  pairs_sub->add_option("--C", pr_c, "threshold multiplier");
  pairs_sub->add_option("--pairs", pr_pairs, "sample count");
  pairs_sub->add_option("--radius", pr_radius, "sampling radius");
  pairs_sub->add_option("--p", pr_p);
  pairs_sub->add_option("--q", pr_q);
  pairs_sub->add_option("--seed", pr_seed);
  pairs_sub->add_option("--out", pr_out);

  std::string tr_field, tr_out, tr_wout;
  double tr_lambda = 1.0, tr_q = 1.0;
  auto* trunc_sub = field_cmd->add_subcommand("truncate", "Lipschitz truncation");
  trunc_sub->add_option("--field", tr_field)->required();
  trunc_sub->add_option("--lambda", tr_lambda, "truncation level")->required();
  trunc_sub->add_option("--q", tr_q);
  trunc_sub->add_option("--w-out", tr_wout, "stem for the truncated field");
  trunc_sub->add_option("--out", tr_out);

  std::string dg_field, dg_out;
  std::vector<double> dg_xi;
  auto* deg_sub = field_cmd->add_subcommand("degree", "topological degree at a target");
  deg_sub->add_option("--field", dg_field)->required();
  deg_sub->add_option("--xi", dg_xi, "target point components")->required()->expected(2, 3);
  deg_sub->add_option("--out", dg_out);

  // ---- scaling ----
  auto* scaling_cmd = app.add_subcommand("scaling", "scaling-law experiments");
  std::string sc_config, sc_out;
  auto* sc_run = scaling_cmd->add_subcommand("run", "run a scaling experiment");
  sc_run->add_option("--config", sc_config, "config JSON")->required();
  sc_run->add_option("--out", sc_out);

  // ---- register ----
  std::string rg_points, rg_out;
  auto* reg_cmd = app.add_subcommand("register", "affine recovery from distances");
  reg_cmd->add_option("--points", rg_points, "points JSON")->required();
  reg_cmd->add_option("--out", rg_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (wells_cmd->parsed()) {
    require_file(wells_in);
    mrl::WellFamily K = mrl::load_wells(wells_in);
    const bool full = wells_cmd->got_subcommand("analyze");
    mrl::CompatibilityReport rep = mrl::compatibility_report(K, wells_seed);
    json report;
    if (full) {
      report = mrl::compat_to_json(rep);
    } else {
      report["format_version"] = mrl::kFormatVersion;
      report["n"] = rep.n;
      report["m"] = rep.m;
      report["seed"] = rep.seed;
      report["connected"] = rep.connected;
      report["edges"] = json::array();
      for (const auto& e : rep.edges) {
        report["edges"].push_back({{"i", e.i},
                                   {"j", e.j},
                                   {"p", mrl::vector_to_json(e.vectors.p)},
                                   {"q", mrl::vector_to_json(e.vectors.q)}});
      }
      report["spanning_tree"] = json::array();
      for (const auto& [a, b] : rep.spanning_tree) report["spanning_tree"].push_back({a, b});
    }
    report["config"] = {{"command", full ? "wells analyze" : "wells connect"},
                        {"in", wells_in},
                        {"seed", wells_seed}};
    emit(wells_out, std::move(report));
    return 0;
  }

  if (gen_sub->parsed()) {
    mrl::GenConfig cfg;
    cfg.kind = gen_kind;
    cfg.params = parse_params(gen_params);
    cfg.N = gen_n;
    cfg.seed = gen_seed;
    std::optional<mrl::WellFamily> wells;
    if (!gen_wells.empty()) {
      require_file(gen_wells);
      wells = mrl::load_wells(gen_wells);
    }
    mrl::GenResult gen = mrl::generate(cfg, wells);
    mrl::write_field(gen.field, gen_out);

    json report;
    report["format_version"] = mrl::kFormatVersion;
    report["seed"] = gen_seed;
    report["config"] = {{"command", "field gen"},    {"kind", gen_kind},
                        {"params", params_to_json(cfg.params)}, {"N", gen_n},
                        {"seed", gen_seed},          {"wells", gen_wells},
                        {"out", gen_out}};
    if (gen.X.size() > 0) report["X"] = mrl::matrix_to_json(gen.X);
    if (gen.Y.size() > 0) report["Y"] = mrl::matrix_to_json(gen.Y);
    if (gen.a.size() > 0) report["a"] = mrl::vector_to_json(gen.a);
    if (gen.b.size() > 0) report["b"] = mrl::vector_to_json(gen.b);
    if (!gen.gradients.empty()) {
      report["gradients"] = json::array();
      for (const auto& g : gen.gradients) report["gradients"].push_back(mrl::matrix_to_json(g));
    }
    emit(gen_out + ".gen.json", std::move(report));
    return 0;
  }

  if (energy_sub->parsed() || majority_sub->parsed()) {
    require_file(an_field + ".field.json");
    require_file(an_wells);
    mrl::GridField f = mrl::read_field(an_field);
    mrl::WellFamily K = mrl::load_wells(an_wells);
    mrl::Jacobians jac = mrl::differentiate(f);
    json report;
    if (energy_sub->parsed()) {
      report = mrl::energy_to_json(mrl::energy(f, jac, K, an_sigma, an_p, an_q));
      report["seed"] = 0;
      report["config"] = {{"command", "field energy"}, {"field", an_field}, {"wells", an_wells},
                          {"sigma", an_sigma},         {"p", an_p},         {"q", an_q}};
    } else {
      report = mrl::majority_to_json(f, mrl::majority_phase(f, jac, K, an_p, an_q));
      report["seed"] = 0;
      report["config"] = {{"command", "field majority"},
                          {"field", an_field},
                          {"wells", an_wells},
                          {"p", an_p},
                          {"q", an_q}};
    }
    emit(an_out, std::move(report));
    return 0;
  }

  if (pairs_sub->parsed()) {
    require_file(pr_field + ".field.json");
    require_file(pr_wells);
    mrl::GridField f = mrl::read_field(pr_field);
    mrl::WellFamily K = mrl::load_wells(pr_wells);
    mrl::Jacobians jac = mrl::differentiate(f);
    const int majority = resolve_majority(f, jac, K, pr_majority, pr_p, pr_q);
    const double eps = pr_eps > 0.0 ? pr_eps : std::pow(pr_sigma, 1.0 / pr_p);
    json report = mrl::pairs_to_json(
        mrl::pair_statistics(f, K, majority, eps, pr_c, pr_pairs, pr_seed, pr_radius));
    report["majority"] = majority;
    report["config"] = {{"command", "field pairs"}, {"field", pr_field},   {"wells", pr_wells},
                        {"majority", pr_majority},  {"epsilon", pr_eps},   {"sigma", pr_sigma},
                        {"C", pr_c},                {"pairs", pr_pairs},   {"radius", pr_radius},
                        {"p", pr_p},                {"q", pr_q},           {"seed", pr_seed}};
    emit(pr_out, std::move(report));
    return 0;
  }

  if (trunc_sub->parsed()) {
    require_file(tr_field + ".field.json");
    mrl::GridField f = mrl::read_field(tr_field);
    mrl::Jacobians jac = mrl::differentiate(f);
    mrl::TruncationResult tr = mrl::lipschitz_truncate(f, jac, tr_lambda, tr_q);
    if (!tr_wout.empty()) mrl::write_field(tr.w, tr_wout);
    json report = mrl::truncation_to_json(tr, tr_lambda);
    report["seed"] = 0;
    report["config"] = {{"command", "field truncate"},
                        {"field", tr_field},
                        {"lambda", tr_lambda},
                        {"q", tr_q},
                        {"w_out", tr_wout}};
    emit(tr_out, std::move(report));
    return 0;
  }

  if (deg_sub->parsed()) {
    require_file(dg_field + ".field.json");
    mrl::GridField f = mrl::read_field(dg_field);
    if (static_cast<int>(dg_xi.size()) != f.n)
      throw std::invalid_argument("--xi size must match the field dimension");
    Eigen::VectorXd xi(f.n);
    for (int d = 0; d < f.n; ++d) xi[d] = dg_xi[d];
    json report;
    report["format_version"] = mrl::kFormatVersion;
    report["seed"] = 0;
    report["degree"] = mrl::degree_at(f, mrl::full_region(f), xi);
    report["config"] = {{"command", "field degree"}, {"field", dg_field}, {"xi", dg_xi}};
    emit(dg_out, std::move(report));
    return 0;
  }

  if (sc_run->parsed()) {
    require_file(sc_config);
    json jc = json::parse(mrl::read_text(sc_config));
    mrl::WellFamily K = jc.contains("wells_file")
                            ? mrl::load_wells(jc.at("wells_file").get<std::string>())
                            : mrl::wells_from_json(jc.at("wells"));
    mrl::ScalingConfig cfg;
    cfg.family = jc.value("family", cfg.family);
    cfg.N = jc.value("N", cfg.N);
    cfg.p = jc.value("p", cfg.p);
    cfg.q = jc.value("q", cfg.q);
    if (jc.contains("sigmas")) cfg.sigmas = jc.at("sigmas").get<std::vector<double>>();
    cfg.omega_radius = jc.value("omega_radius", cfg.omega_radius);
    cfg.t0 = jc.value("t0", cfg.t0);
    cfg.extent = jc.value("extent", cfg.extent);
    cfg.width = jc.value("width", cfg.width);
    cfg.i = jc.value("i", cfg.i);
    cfg.j = jc.value("j", cfg.j);
    cfg.a_budget = jc.value("a_budget", cfg.a_budget);
    cfg.seed = jc.value("seed", cfg.seed);

    json report = mrl::scaling_to_json(mrl::scaling_experiment(K, cfg));
    report["config"] = {{"command", "scaling run"},
                        {"family", cfg.family},
                        {"N", cfg.N},
                        {"p", cfg.p},
                        {"q", cfg.q},
                        {"sigmas", cfg.sigmas},
                        {"omega_radius", cfg.omega_radius},
                        {"t0", cfg.t0},
                        {"extent", cfg.extent},
                        {"width", cfg.width},
                        {"i", cfg.i},
                        {"j", cfg.j},
                        {"a_budget", cfg.a_budget},
                        {"seed", cfg.seed},
                        {"wells", mrl::wells_to_json(K)}};
    emit(sc_out, std::move(report));
    return 0;
  }

  if (reg_cmd->parsed()) {
    require_file(rg_points);
    mrl::PointCorrespondence pc = mrl::points_from_json(json::parse(mrl::read_text(rg_points)));
    json report = mrl::recovered_to_json(pc, mrl::recover_orthogonal_affine(pc));
    report["seed"] = 0;
    report["config"] = {{"command", "register"}, {"points", rg_points}};
    emit(rg_out, std::move(report));
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mrl::Error& e) {
    std::cerr << "numerical error [" << mrl::error_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
