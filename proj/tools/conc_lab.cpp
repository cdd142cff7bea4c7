// conc-lab: configuration-driven experiment runner for the simulation and
// verification toolkit. Subcommands: simulate, localtimes, certify,
// transport, concentrate, selftest.
//
// Exit codes: 0 success, 2 config error, 3 numerical/certification error,
// 4 solver non-convergence.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "conclab/concentration.hpp"
#include "conclab/errors.hpp"
#include "conclab/geometry.hpp"
#include "conclab/io.hpp"
#include "conclab/metrics.hpp"
#include "conclab/rank.hpp"
#include "conclab/rng.hpp"
#include "conclab/sde.hpp"
#include "conclab/skorokhod.hpp"
#include "conclab/stats.hpp"
#include "conclab/transport.hpp"
#include "conclab/version.hpp"

namespace fs = std::filesystem;
using conclab::Json;

namespace {

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw conclab::ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw conclab::ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw conclab::ConfigError("config root must be a JSON object");
  if (j.contains("schema_version") && j["schema_version"].get<int>() != conclab::kSchemaVersion)
    throw conclab::ConfigError("unsupported schema_version");
  return j;
}

void check_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& ctx) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw conclab::ConfigError("unknown key '" + key + "' in " + ctx);
  }
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw conclab::ConfigError("bad value for config key '" + key + "'");
  }
}

Eigen::VectorXd get_vector(const Json& j, const std::string& key) {
  const auto v = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd parse_csv_doubles(const std::string& text) {
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(',', start);
    const std::string cell =
        text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!cell.empty()) vals.push_back(std::stod(cell));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

conclab::PathMetric parse_metric(const std::string& name) {
  if (name == "uniform") return conclab::PathMetric::uniform();
  if (name == "averaged-uniform") return conclab::PathMetric::averaged_uniform();
  if (name == "uniform-euclidean") return conclab::PathMetric::uniform_euclidean();
  throw conclab::ConfigError("unknown metric '" + name + "'");
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;

  Json load() const {
    if (threads > 0) setenv("CONC_LAB_THREADS", std::to_string(threads).c_str(), 1);
    return load_config(config_path);
  }
  std::uint64_t resolve_seed(const Json& cfg) const {
    if (seed) return *seed;
    return get_or<std::uint64_t>(cfg, "seed", 0);
  }
  fs::path resolve_out(const Json& cfg) const {
    const std::string dir = out.empty() ? get_or<std::string>(cfg, "out", "out") : out;
    fs::create_directories(dir);
    return dir;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file");
  cmd->add_option("--seed", c.seed, "master seed (overrides config)");
  cmd->add_option("--out", c.out, "output directory (overrides config)");
  cmd->add_option("--threads", c.threads, "worker cap (same as CONC_LAB_THREADS)");
}

conclab::RankModelSpec rank_spec_from(const Json& cfg, Eigen::Index n,
                                      const std::string& deltas_flag) {
  conclab::RankModelSpec spec;
  if (!deltas_flag.empty())
    spec.deltas = parse_csv_doubles(deltas_flag);
  else if (cfg.contains("deltas"))
    spec.deltas = get_vector(cfg, "deltas");
  else
    spec.deltas = Eigen::VectorXd::Zero(n);
  if (spec.deltas.size() != n) throw conclab::ConfigError("deltas length does not match n");
  spec.x0 = cfg.contains("x0") ? get_vector(cfg, "x0") : Eigen::VectorXd::Zero(n);
  if (spec.x0.size() != n) throw conclab::ConfigError("x0 length does not match n");
  return spec;
}

conclab::Ensemble simulate_bm_ensemble(Eigen::Index n, const Eigen::VectorXd& mu,
                                       const Eigen::VectorXd& sigma, const Eigen::VectorXd& x0,
                                       const conclab::SimConfig& sim) {
  conclab::SdeSystem sys;
  for (Eigen::Index i = 0; i < n; ++i) {
    sys.drifts.push_back(mu[i] == 0.0 ? conclab::DriftSpec::zero()
                                      : conclab::DriftSpec::constant(mu[i]));
    sys.diffusions.push_back(conclab::DiffusionSpec::constant(sigma[i]));
  }
  sys.x0 = x0;
  return conclab::euler_maruyama(sys, sim);
}

// ---------------------------------------------------------------------------

int run_simulate(const Common& common, Eigen::Index n_flag, Eigen::Index paths_flag,
                 double T_flag, double dt_flag, const std::string& deltas_flag,
                 const std::string& format_flag) {
  Json cfg = common.load();
  check_keys(cfg, {"schema_version", "seed", "out", "model", "T", "dt", "paths", "format"},
             "simulate config");
  Json model = cfg.contains("model") ? cfg.at("model") : Json{{"type", "rank"}};
  check_keys(model, {"type", "n", "deltas", "x0", "mu", "sigma"}, "simulate model");

  const auto n = n_flag > 0 ? n_flag : get_or<Eigen::Index>(model, "n", 2);
  const double T = T_flag > 0 ? T_flag : get_or<double>(cfg, "T", 1.0);
  const double dt = dt_flag > 0 ? dt_flag : get_or<double>(cfg, "dt", 1e-3);
  const auto paths = paths_flag > 0 ? paths_flag : get_or<Eigen::Index>(cfg, "paths", 100);
  const std::string format =
      !format_flag.empty() ? format_flag : get_or<std::string>(cfg, "format", "wide");
  const std::uint64_t seed = common.resolve_seed(cfg);
  const fs::path out = common.resolve_out(cfg);
  const std::string type = get_or<std::string>(model, "type", "rank");

  conclab::SimConfig sim{conclab::make_grid(T, dt), paths, seed, 0};
  conclab::Ensemble ens;
  Json resolved{{"T", T}, {"dt", dt}, {"paths", paths}, {"format", format}, {"seed", seed}};
  if (type == "rank") {
    const auto spec = rank_spec_from(model, n, deltas_flag);
    ens = conclab::simulate_rank_model(spec, sim).raw;
    resolved["model"] = Json{{"type", "rank"},
                             {"n", n},
                             {"deltas", to_vec(spec.deltas)},
                             {"x0", to_vec(spec.x0)}};
  } else if (type == "bm") {
    const Eigen::VectorXd mu =
        model.contains("mu") ? get_vector(model, "mu") : Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd sigma =
        model.contains("sigma") ? get_vector(model, "sigma") : Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd x0 =
        model.contains("x0") ? get_vector(model, "x0") : Eigen::VectorXd::Zero(n);
    if (mu.size() != n || sigma.size() != n || x0.size() != n)
      throw conclab::ConfigError("bm model: mu/sigma/x0 length must equal n");
    ens = simulate_bm_ensemble(n, mu, sigma, x0, sim);
    resolved["model"] = Json{{"type", "bm"},
                             {"n", n},
                             {"mu", to_vec(mu)},
                             {"sigma", to_vec(sigma)},
                             {"x0", to_vec(x0)}};
  } else {
    throw conclab::ConfigError("model.type must be 'rank' or 'bm'");
  }

  std::vector<std::string> outputs;
  if (format == "wide") {
    conclab::write_text(out / "paths.csv", conclab::ensemble_to_wide_csv(ens));
    outputs.push_back("paths.csv");
  } else if (format == "members") {
    outputs = conclab::ensemble_to_member_csvs(ens, out);
  } else {
    throw conclab::ConfigError("format must be 'wide' or 'members'");
  }
  conclab::write_json(out / "seeds.json", conclab::seed_lineage_to_json(ens.seeds));
  outputs.push_back("seeds.json");
  conclab::write_json(out / "manifest.json",
                      conclab::make_manifest("simulate", resolved, seed, outputs));
  std::cout << "simulate: wrote " << outputs.size() << " files to " << out.string() << "\n";
  return 0;
}

int run_localtimes(const Common& common, Eigen::Index n_flag, Eigen::Index paths_flag,
                   double T_flag, double dt_flag, const std::string& deltas_flag, double eps_flag,
                   const std::string& method_flag) {
  Json cfg = common.load();
  check_keys(cfg,
             {"schema_version", "seed", "out", "n", "deltas", "x0", "T", "dt", "paths", "eps",
              "method"},
             "localtimes config");
  const auto n = n_flag > 0 ? n_flag : get_or<Eigen::Index>(cfg, "n", 2);
  const double T = T_flag > 0 ? T_flag : get_or<double>(cfg, "T", 1.0);
  const double dt = dt_flag > 0 ? dt_flag : get_or<double>(cfg, "dt", 1e-3);
  const auto paths = paths_flag > 0 ? paths_flag : get_or<Eigen::Index>(cfg, "paths", 1000);
  const double eps = eps_flag > 0 ? eps_flag : get_or<double>(cfg, "eps", 0.01);
  const std::string method =
      !method_flag.empty() ? method_flag : get_or<std::string>(cfg, "method", "sp");
  if (method != "sp" && method != "occupation")
    throw conclab::ConfigError("method must be 'sp' or 'occupation'");
  const std::uint64_t seed = common.resolve_seed(cfg);
  const fs::path out = common.resolve_out(cfg);

  const auto spec = rank_spec_from(cfg, n, deltas_flag);
  const conclab::SimConfig sim{conclab::make_grid(T, dt), paths, seed, 0};
  const auto re = conclab::simulate_rank_model(spec, sim);
  const auto lt = conclab::rank_local_times(re, conclab::chamber_domain(n), eps);

  const Eigen::MatrixXd occ = lt.occupation_at_horizon();
  const Eigen::MatrixXd sp = lt.sp_at_horizon();
  auto table = [](const Eigen::MatrixXd& m) {
    std::string csv = "member";
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      csv += ",L_" + std::to_string(j + 1) + "_" + std::to_string(j + 2);
    csv += '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      csv += std::to_string(i);
      for (Eigen::Index j = 0; j < m.cols(); ++j) csv += ',' + conclab::format_double(m(i, j));
      csv += '\n';
    }
    return csv;
  };
  conclab::write_text(out / "localtimes.csv", table(method == "sp" ? sp : occ));
  conclab::write_text(out / "localtimes_occupation.csv", table(occ));
  conclab::write_text(out / "localtimes_sp.csv", table(sp));

  Json summary{{"method", method},
               {"eps", eps},
               {"mean_occupation", Json::array()},
               {"mean_sp", Json::array()}};
  for (Eigen::Index j = 0; j < occ.cols(); ++j) {
    summary["mean_occupation"].push_back(occ.col(j).mean());
    summary["mean_sp"].push_back(sp.col(j).mean());
  }
  conclab::write_json(out / "localtimes_summary.json", summary);

  Json resolved{{"n", n},     {"T", T},         {"dt", dt},         {"paths", paths},
                {"eps", eps}, {"seed", seed},   {"method", method},
                {"deltas", to_vec(spec.deltas)}};
  conclab::write_json(out / "manifest.json",
                      conclab::make_manifest("localtimes", resolved, seed,
                                             {"localtimes.csv", "localtimes_occupation.csv",
                                              "localtimes_sp.csv", "localtimes_summary.json"}));
  std::cout << "localtimes: " << paths << " members, n=" << n << ", method=" << method << "\n";
  return 0;
}

conclab::PolyhedralDomain domain_from_json(const Json& j) {
  conclab::PolyhedralDomain dom;
  dom.dim = j.at("dim").get<Eigen::Index>();
  for (const auto& f : j.at("faces")) {
    conclab::Face face;
    face.normal = get_vector(f, "normal");
    face.direction = get_vector(f, "direction");
    face.offset = get_or<double>(f, "offset", 0.0);
    dom.faces.push_back(std::move(face));
  }
  return dom;
}

int run_certify(const Common& common, Eigen::Index n_flag, const std::string& domain_flag) {
  Json cfg = common.load();
  check_keys(cfg, {"schema_version", "out", "n", "domain", "seed"}, "certify config");
  const fs::path out = common.resolve_out(cfg);

  conclab::PolyhedralDomain dom;
  Json resolved;
  Eigen::Index n = 0;
  const std::string domain_path =
      !domain_flag.empty() ? domain_flag : get_or<std::string>(cfg, "domain", "");
  if (!domain_path.empty()) {
    std::ifstream in(domain_path);
    if (!in) throw conclab::ConfigError("cannot open domain file: " + domain_path);
    Json dj;
    in >> dj;
    dom = domain_from_json(dj);
    n = dom.dim;
    resolved = Json{{"domain", domain_path}};
  } else {
    n = n_flag > 0 ? n_flag : get_or<Eigen::Index>(cfg, "n", 0);
    if (n < 2) throw conclab::ConfigError("certify: provide --n >= 2 or a domain file");
    dom = conclab::chamber_domain(n);
    resolved = Json{{"n", n}};
  }

  const auto cert = conclab::certificate(dom);
  conclab::write_json(out / "certificate.json", conclab::certificate_to_json(cert, n));
  std::vector<std::string> outputs{"certificate.json"};
  if (n >= 2) {
    conclab::write_json(out / "spacing.json",
                        conclab::spacing_report_to_json(conclab::spacing_min_singular(n), n));
    outputs.push_back("spacing.json");
  }
  conclab::write_json(out / "manifest.json", conclab::make_manifest("certify", resolved, 0, outputs));
  std::cout << conclab::certificate_to_json(cert, n).dump(2) << "\n";
  return 0;
}

int run_transport(const Common& common, const std::string& op_flag, Eigen::Index n_flag,
                  Eigen::Index members_flag, int p_flag, const std::string& metric_flag,
                  const std::string& deltas_flag, double T_flag, double dt_flag,
                  Eigen::Index samples_flag) {
  Json cfg = common.load();
  check_keys(cfg,
             {"schema_version", "seed", "out", "op", "n", "deltas", "x0", "T", "dt", "members",
              "p", "metric", "samples", "tol", "dump_cost_matrix"},
             "transport config");
  const std::string op = !op_flag.empty() ? op_flag : get_or<std::string>(cfg, "op", "");
  const std::uint64_t seed = common.resolve_seed(cfg);
  const fs::path out = common.resolve_out(cfg);

  if (op == "orlicz") {
    const auto count =
        samples_flag > 0 ? samples_flag : get_or<Eigen::Index>(cfg, "samples", 1000000);
    const double tol = get_or<double>(cfg, "tol", 1e-10);
    const conclab::CounterRng rng(seed, conclab::RngStream::Sampling);
    Eigen::VectorXd samples(count);
    for (Eigen::Index i = 0; i < count; ++i)
      samples[i] = std::abs(rng.normal(static_cast<std::uint64_t>(i), 0, 0));
    const auto result = conclab::orlicz_norm(samples, tol);
    conclab::write_json(out / "orlicz.json", conclab::orlicz_to_json(result));
    Json resolved{{"op", op}, {"samples", count}, {"tol", tol}, {"seed", seed}};
    conclab::write_json(out / "manifest.json",
                        conclab::make_manifest("transport", resolved, seed, {"orlicz.json"}));
    std::cout << conclab::orlicz_to_json(result).dump(2) << "\n";
    return 0;
  }

  const auto n = n_flag > 0 ? n_flag : get_or<Eigen::Index>(cfg, "n", 2);
  const double T = T_flag > 0 ? T_flag : get_or<double>(cfg, "T", 1.0);
  const double dt = dt_flag > 0 ? dt_flag : get_or<double>(cfg, "dt", 1e-2);
  const auto members = members_flag > 0 ? members_flag : get_or<Eigen::Index>(cfg, "members", 256);
  const int p = p_flag > 0 ? p_flag : get_or<int>(cfg, "p", 2);
  const std::string metric_name =
      !metric_flag.empty() ? metric_flag : get_or<std::string>(cfg, "metric", "averaged-uniform");
  const auto metric = parse_metric(metric_name);
  const conclab::SimConfig sim{conclab::make_grid(T, dt), members, seed, 0};

  if (op == "qtci-verify") {
    const auto spec = rank_spec_from(cfg, n, deltas_flag);
    const auto rank = conclab::simulate_rank_model(spec, sim);
    conclab::SimConfig wiener_sim = sim;
    wiener_sim.master_seed = seed ^ 0x9e3779b97f4a7c15ull;  // independent noise
    const auto wiener = simulate_bm_ensemble(n, Eigen::VectorXd::Zero(n),
                                             Eigen::VectorXd::Ones(n), spec.x0, wiener_sim);
    const double C = conclab::qtci_constants(0.0, 0.0, 0.0, 1.0, T, n).c_nd;
    const double H = 0.5 * T * spec.deltas.squaredNorm();
    const auto rep = conclab::qtci_verify(wiener, rank.raw, C, H, p, metric);
    conclab::write_json(out / "qtci_verify.json", conclab::slack_report_to_json(rep));
    Json resolved{{"op", op}, {"n", n},     {"T", T},
                  {"dt", dt}, {"members", members}, {"p", p},
                  {"metric", metric_name},          {"seed", seed},
                  {"deltas", to_vec(spec.deltas)}};
    conclab::write_json(out / "manifest.json",
                        conclab::make_manifest("transport", resolved, seed, {"qtci_verify.json"}));
    std::cout << conclab::slack_report_to_json(rep).dump(2) << "\n";
    return 0;
  }

  if (op == "wasserstein") {
    // Distance between a rank ensemble and an independent Wiener ensemble.
    const auto spec = rank_spec_from(cfg, n, deltas_flag);
    const auto a = conclab::simulate_rank_model(spec, sim);
    conclab::SimConfig bsim = sim;
    bsim.master_seed = seed ^ 0x9e3779b97f4a7c15ull;
    const auto b = simulate_bm_ensemble(n, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n),
                                        spec.x0, bsim);
    const auto [w, plan] = conclab::wasserstein_exact(a.raw, b, p, metric);
    Json report{{"wasserstein", w}, {"p", p}, {"metric", metric_name}, {"members", members}};
    conclab::write_json(out / "wasserstein.json", report);
    std::vector<std::string> outputs{"wasserstein.json", "coupling.json"};
    conclab::write_json(out / "coupling.json", conclab::coupling_plan_to_json(plan));
    if (get_or<bool>(cfg, "dump_cost_matrix", false)) {
      conclab::write_text(
          out / "cost_matrix.csv",
          conclab::matrix_to_csv(conclab::transport_cost_matrix(a.raw, b, p, metric)));
      outputs.push_back("cost_matrix.csv");
    }
    Json resolved{{"op", op}, {"n", n},     {"T", T},
                  {"dt", dt}, {"members", members}, {"p", p},
                  {"metric", metric_name},          {"seed", seed},
                  {"deltas", to_vec(spec.deltas)}};
    conclab::write_json(out / "manifest.json",
                        conclab::make_manifest("transport", resolved, seed, outputs));
    std::cout << report.dump(2) << "\n";
    return 0;
  }

  throw conclab::ConfigError("transport op must be one of qtci-verify, wasserstein, orlicz");
}

int run_concentrate(const Common& common, bool thm1_flag, Eigen::Index n_flag,
                    Eigen::Index paths_flag, double T_flag, double dt_flag,
                    const std::string& deltas_flag, const std::string& method_flag) {
  Json cfg = common.load();
  check_keys(cfg,
             {"schema_version", "seed", "out", "experiment", "n", "deltas", "x0", "T", "dt",
              "paths", "r_count", "r_step", "scale_exponent", "method", "eps"},
             "concentrate config");
  const std::string experiment =
      thm1_flag ? "thm1" : get_or<std::string>(cfg, "experiment", "thm1");
  if (experiment != "thm1")
    throw conclab::ConfigError("concentrate: only the 'thm1' experiment is defined");

  conclab::Thm1Config tc;
  tc.n = n_flag > 0 ? n_flag : get_or<Eigen::Index>(cfg, "n", 2);
  tc.T = T_flag > 0 ? T_flag : get_or<double>(cfg, "T", 1.0);
  tc.dt = dt_flag > 0 ? dt_flag : get_or<double>(cfg, "dt", 1e-3);
  tc.n_paths = paths_flag > 0 ? paths_flag : get_or<Eigen::Index>(cfg, "paths", 5000);
  tc.master_seed = common.resolve_seed(cfg);
  tc.scale_exponent = get_or<double>(cfg, "scale_exponent", 2.5);
  tc.eps = get_or<double>(cfg, "eps", 0.01);
  const std::string method =
      !method_flag.empty() ? method_flag : get_or<std::string>(cfg, "method", "sp");
  tc.method = method == "occupation" ? conclab::LocalTimeMethod::Occupation
                                     : conclab::LocalTimeMethod::SkorokhodMap;
  if (!deltas_flag.empty())
    tc.deltas = parse_csv_doubles(deltas_flag);
  else if (cfg.contains("deltas"))
    tc.deltas = get_vector(cfg, "deltas");
  const auto r_count = get_or<Eigen::Index>(cfg, "r_count", 16);
  const double r_step = get_or<double>(cfg, "r_step", 0.1);
  Eigen::VectorXd r(r_count);
  const double r0 = 2.0 * std::sqrt(2.0 * std::log(2.0));
  for (Eigen::Index i = 0; i < r_count; ++i) r[i] = r0 + r_step * static_cast<double>(i);
  tc.r_grid = r;

  const fs::path out = common.resolve_out(cfg);
  const auto rep = conclab::thm1_experiment(tc);
  conclab::write_json(out / "tailreport.json", conclab::tail_report_to_json(rep));
  conclab::write_text(out / "tailreport.csv", conclab::tail_report_to_csv(rep));

  Json resolved{{"experiment", "thm1"},
                {"n", tc.n},
                {"T", tc.T},
                {"dt", tc.dt},
                {"paths", tc.n_paths},
                {"seed", tc.master_seed},
                {"scale_exponent", tc.scale_exponent},
                {"method", method},
                {"eps", tc.eps},
                {"r_count", r_count},
                {"r_step", r_step}};
  if (tc.deltas.size()) resolved["deltas"] = to_vec(tc.deltas);
  conclab::write_json(out / "manifest.json",
                      conclab::make_manifest("concentrate", resolved, tc.master_seed,
                                             {"tailreport.json", "tailreport.csv"}));
  std::cout << "concentrate: C_fit=" << rep.fitted_C << " diag_slope=" << rep.diag_fit.slope
            << " diag_r2=" << rep.diag_fit.r2 << "\n";
  return 0;
}

bool philox_check() {
  const auto r = conclab::Philox4x32::block({0, 0, 0, 0}, {0, 0});
  return r[0] == 0x6627e8d5u && r[1] == 0xe169c58du && r[2] == 0xbc57ac4cu && r[3] == 0x9b00dbd8u;
}

int run_selftest() {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  const auto grid = conclab::make_grid(1.0, 0.3);
  report("grid truncated final step", grid.size() == 5 && grid.points[4] == 1.0);

  report("philox known-answer vector", philox_check());

  const auto mats = conclab::build_matrices(conclab::chamber_domain(3));
  report("chamber Q closed form",
         std::abs(mats.Q(0, 1) - 0.5) < 1e-14 && std::abs(mats.Q(1, 0) - 0.5) < 1e-14 &&
             mats.Q(2, 2) < 1e-12);

  bool spectral_ok = true;
  for (Eigen::Index n = 2; n <= 20; ++n)
    spectral_ok =
        spectral_ok &&
        std::abs(conclab::spectral_radius(
                     conclab::build_matrices(conclab::chamber_domain(n)).Q) -
                 std::cos(M_PI / static_cast<double>(n))) < 1e-10;
  report("spectral radius cos(pi/n), n = 2..20", spectral_ok);

  const auto [u, delta] = conclab::build_u_vector(4);
  report("u vector n = 4", u[0] == 3.0 / 16 && u[1] == 0.25 && delta == 1.0 / 16);

  const auto cert = conclab::certificate(conclab::chamber_domain(4));
  report("certificate n = 4", cert.delta == 0.0625 && cert.diam_B <= 8.0 && cert.K <= 129.0);

  const auto spacing = conclab::spacing_min_singular(3);
  report("spacing sigma_min^2 at n = 3", std::abs(spacing.min_singular_sq - 0.5) < 1e-12);

  report("h function", std::abs(conclab::h_function(1e-12)) < 1e-9 &&
                           std::abs(conclab::h_function(1.0 / std::log(2.0)) + 0.414) < 0.01);

  const auto [pv, pok] = conclab::bound_preq(1.0, 2.0 * std::sqrt(2.0 * std::log(2.0)));
  report("preq bound at threshold", std::abs(pv - 1.0) < 1e-12 && pok);

  const auto orl = conclab::orlicz_norm(Eigen::VectorXd::Constant(100, 2.0), 1e-12);
  report("orlicz constant samples", std::abs(orl.norm_phi - 2.0 / 1.1461932206) < 1e-6);

  Eigen::MatrixXd cost(3, 3);
  cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const auto [assignment, total] = conclab::solve_assignment(cost);
  (void)assignment;
  report("assignment 3x3", total == 5.0);

  conclab::Ensemble xi;
  xi.grid = conclab::make_grid(2.0, 0.01);
  xi.members = {Eigen::MatrixXd::Constant(xi.grid.size(), 1, 0.5)};
  report("girsanov entropy of constant control",
         std::abs(conclab::entropy_girsanov(xi) - 0.25) < 1e-12);

  std::cout << (failures == 0 ? "selftest: all checks passed"
                              : "selftest: " + std::to_string(failures) + " failures")
            << "\n";
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concentration-of-measure lab for rank-based diffusions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(conclab::kToolName) + " " + conclab::kVersion);

  Common c_sim, c_lt, c_cert, c_tr, c_conc;
  Eigen::Index n = 0, paths = 0, members = 0, samples = 0;
  double T = 0, dt = 0, eps = 0;
  int p = 0;
  std::string deltas, format, method, domain, op, metric;
  bool thm1 = false;

  auto* sim = app.add_subcommand("simulate", "simulate rank-based or independent SDE ensembles");
  add_common(sim, c_sim);
  sim->add_option("--n", n, "dimension / particle count");
  sim->add_option("--paths", paths, "ensemble size");
  sim->add_option("--T", T, "horizon");
  sim->add_option("--dt", dt, "step");
  sim->add_option("--deltas", deltas, "comma-separated rank drifts");
  sim->add_option("--format", format, "wide | members");

  auto* lt = app.add_subcommand("localtimes", "gap local times of a rank ensemble");
  add_common(lt, c_lt);
  lt->add_option("--n", n, "particle count");
  lt->add_option("--paths", paths, "ensemble size");
  lt->add_option("--T", T, "horizon");
  lt->add_option("--dt", dt, "step");
  lt->add_option("--deltas", deltas, "comma-separated rank drifts");
  lt->add_option("--eps", eps, "occupation width");
  lt->add_option("--method", method, "sp | occupation");

  auto* cert = app.add_subcommand("certify", "Lipschitz certificate for a reflection domain");
  add_common(cert, c_cert);
  cert->add_option("--n", n, "chamber dimension");
  cert->add_option("--domain", domain, "JSON domain file");

  auto* tr = app.add_subcommand("transport", "Wasserstein / entropy / Orlicz / QTCI checks");
  add_common(tr, c_tr);
  tr->add_option("--op", op, "qtci-verify | wasserstein | orlicz");
  tr->add_option("--n", n, "dimension");
  tr->add_option("--members", members, "ensemble size");
  tr->add_option("--p", p, "Wasserstein order (1 or 2)");
  tr->add_option("--metric", metric, "uniform | averaged-uniform | uniform-euclidean");
  tr->add_option("--deltas", deltas, "comma-separated rank drifts");
  tr->add_option("--T", T, "horizon");
  tr->add_option("--dt", dt, "step");
  tr->add_option("--samples", samples, "sample count for orlicz");

  auto* conc = app.add_subcommand("concentrate", "tail reports incl. the local-time experiment");
  add_common(conc, c_conc);
  conc->add_flag("--thm1", thm1, "run the max-local-time experiment");
  conc->add_option("--n", n, "particle count");
  conc->add_option("--paths", paths, "sample count");
  conc->add_option("--T", T, "horizon");
  conc->add_option("--dt", dt, "step");
  conc->add_option("--deltas", deltas, "comma-separated rank drifts");
  conc->add_option("--method", method, "sp | occupation");

  auto* st = app.add_subcommand("selftest", "run the analytic-oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(c_sim, n, paths, T, dt, deltas, format);
    if (lt->parsed()) return run_localtimes(c_lt, n, paths, T, dt, deltas, eps, method);
    if (cert->parsed()) return run_certify(c_cert, n, domain);
    if (tr->parsed())
      return run_transport(c_tr, op, n, members, p, metric, deltas, T, dt, samples);
    if (conc->parsed()) return run_concentrate(c_conc, thm1, n, paths, T, dt, deltas, method);
    if (st->parsed()) return run_selftest();
  } catch (const conclab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const conclab::ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return 4;
  } catch (const conclab::CertificationError& e) {
    std::cerr << "certification error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
