// Acceptance suite: runs every quantitative criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "conclab/concentration.hpp"
#include "conclab/geometry.hpp"
#include "conclab/metrics.hpp"
#include "conclab/rank.hpp"
#include "conclab/rng.hpp"
#include "conclab/sde.hpp"
#include "conclab/skorokhod.hpp"
#include "conclab/stats.hpp"
#include "conclab/transport.hpp"

using namespace conclab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(int number, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << number << ": " << name << "  ["
            << detail << "]\n";
  if (!ok) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// 1. Levy identity: KS(L(1), |N(0,1)|) < 0.02 at dt = 1e-3 with 20000 paths,
//    under 30 s single-threaded.
void criterion_1() {
  setenv("CONC_LAB_THREADS", "1", 1);
  const auto t0 = std::chrono::steady_clock::now();

  SdeSystem bm;
  bm.drifts = {DriftSpec::zero()};
  bm.diffusions = {DiffusionSpec::constant(1.0)};
  bm.x0 = Eigen::VectorXd::Zero(1);
  const Eigen::Index m = 20000;
  const auto ens = euler_maruyama(bm, SimConfig{make_grid(1.0, 1e-3), m, 20260127, 0});

  Eigen::VectorXd ell(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& w = ens.members[static_cast<std::size_t>(i)];
    double running_min = 0.0;
    for (Eigen::Index k = 0; k < w.rows(); ++k) running_min = std::min(running_min, w(k, 0));
    ell[i] = -running_min;
  }
  const double ks = ks_distance(ell, folded_normal_cdf);
  const double elapsed = seconds_since(t0);
  unsetenv("CONC_LAB_THREADS");
  verdict(1, "Levy identity KS < 0.02", ks < 0.02 && elapsed < 30.0,
          "KS=" + fmt(ks) + ", " + fmt(elapsed) + "s single-threaded");
}

// 2. Spectral certification: sigma(chamber Q) = cos(pi/n) within 1e-10 for
//    2 <= n <= 50, power iteration vs dense eigensolve, under 1 s.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool ok = true;
  for (Eigen::Index n = 2; n <= 50; ++n) {
    const Eigen::MatrixXd Q = build_matrices(chamber_domain(n)).Q;
    const double sr = spectral_radius(Q, 1e-12);
    const double closed = std::cos(M_PI / static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    const double dense = es.eigenvalues().cwiseAbs().maxCoeff();
    worst = std::max({worst, std::abs(sr - closed), std::abs(sr - dense)});
    ok = ok && std::abs(sr - closed) < 1e-10 && std::abs(sr - dense) < 1e-10;
  }
  const double elapsed = seconds_since(t0);
  verdict(2, "spectral radius = cos(pi/n), n = 2..50", ok && elapsed < 1.0,
          "max |error|=" + fmt(worst) + ", " + fmt(elapsed) + "s");
}

// 3. Certificate arithmetic at n = 4, exact rationals.
void criterion_3() {
  const auto cert = certificate(chamber_domain(4));
  const bool ok = cert.delta == 0.0625 && cert.diam_B <= 8.0 && cert.K <= 129.0 &&
                  cert.K == 1.0 + cert.diam_B / cert.delta;
  verdict(3, "certificate n = 4: delta = 1/16, diam <= 8, K <= 129", ok,
          "delta=" + fmt(cert.delta) + ", diam=" + fmt(cert.diam_B) + ", K=" + fmt(cert.K));
}

// 4. h-function: value at 1/log 2 and negativity over a 1e5-point grid.
void criterion_4() {
  const double at_end = h_function(1.0 / std::log(2.0));
  bool negative = true;
  const double top = 1.0 / std::log(2.0);
  for (int i = 1; i <= 100000; ++i) {
    const double x = top * i / 100001.0;
    if (!(h_function(x) < 0.0)) {
      negative = false;
      break;
    }
  }
  const bool ok = std::abs(at_end - (-0.41)) <= 0.01 && negative;
  verdict(4, "h(1/log 2) = -0.41 +- 0.01 and h < 0 on (0, 1/log 2)", ok,
          "h(1/log2)=" + fmt(at_end) + ", negative on grid=" + (negative ? "yes" : "no"));
}

// 5. Orlicz norm of 1e6 folded normal samples.
void criterion_5() {
  const CounterRng rng(5, RngStream::Sampling);
  const Eigen::Index m = 1000000;
  Eigen::VectorXd samples(m);
  for (Eigen::Index i = 0; i < m; ++i)
    samples[i] = std::abs(rng.normal(static_cast<std::uint64_t>(i), 0, 0));
  const Eigen::ArrayXd t = samples.array();  // a = 1
  const double mean_phi = (t.exp() - t - 1.0).mean();
  const auto result = orlicz_norm(samples, 1e-10);
  const bool ok = std::abs(mean_phi - 0.976) <= 0.005 && std::abs(result.norm_phi - 1.0) <= 0.02;
  verdict(5, "Orlicz: mean Phi(|L|) = 0.976 +- 0.005, norm within 2% of 1", ok,
          "mean=" + fmt(mean_phi) + ", norm=" + fmt(result.norm_phi));
}

// 6. Exact OT equals exhaustive permutation search for m <= 7.
void criterion_6() {
  const CounterRng rng(6, RngStream::Sampling);
  bool ok = true;
  for (std::uint64_t trial = 0; trial < 100 && ok; ++trial) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(trial % 6);
    Eigen::MatrixXd cost(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        cost(i, j) = std::abs(rng.normal(trial, static_cast<std::uint64_t>(i),
                                         static_cast<std::uint32_t>(j)));
    const auto [assignment, total] = solve_assignment(cost);
    double solver_value = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) solver_value += cost(i, assignment[static_cast<std::size_t>(i)]);

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    double brute = std::numeric_limits<double>::infinity();
    do {
      double v = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) v += cost(i, perm[static_cast<std::size_t>(i)]);
      brute = std::min(brute, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    ok = solver_value == brute;
  }
  verdict(6, "exact OT = brute force on 100 instances (m <= 7)", ok,
          ok ? "all equal exactly" : "mismatch found");
}

// 7. QTCI slack for constant drift: coupling distance cT vs bound sqrt(2 C H).
void criterion_7() {
  bool ok = true;
  std::string detail;
  for (double T : {0.5, 1.0}) {
    for (double c : {0.1, 0.5, 1.0}) {
      const double C = qtci_constants(0.0, 0.0, 0.0, 1.0, T, 1).c_1d;  // 4T exactly
      const double H = c * c * T / 2.0;
      const double bound = std::sqrt(2.0 * C * H);
      const double coupling = c * T;
      const double ratio = bound / coupling;
      ok = ok && bound >= coupling && std::abs(ratio - 2.0) < 1e-12;

      // Simulated synchronous coupling realizes cT pathwise.
      SdeSystem base, drifted;
      base.drifts = {DriftSpec::zero()};
      base.diffusions = {DiffusionSpec::constant(1.0)};
      base.x0 = Eigen::VectorXd::Zero(1);
      drifted = base;
      drifted.drifts = {DriftSpec::constant(c)};
      const auto [a, b] = synchronous_couple(base, drifted, SimConfig{make_grid(T, 1e-2), 4, 7, 0});
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = metric_eval(PathMetric::uniform(), a.member(i), b.member(i));
        ok = ok && std::abs(d - coupling) < 1e-10;
      }
      if (T == 1.0 && c == 1.0) detail = "ratio=" + fmt(ratio) + " (= 2 exactly at K = 0)";
    }
  }
  verdict(7, "QTCI slack for constant drifts: bound/coupling = 2 >= 1", ok, detail);
}

// 8. Rank bookkeeping: beta identity to 1e-9 on every path, center-of-mass
//    moments inside 3-sigma bands.
void criterion_8() {
  RankModelSpec spec;
  spec.deltas = Eigen::VectorXd(5);
  spec.deltas << 1.0, 1.0, 0.0, 0.0, 0.0;  // mean drift 0.4
  spec.x0 = Eigen::VectorXd::Zero(5);
  const Eigen::Index m = 1000;
  const double T = 1.0;
  const auto re = simulate_rank_model(spec, SimConfig{make_grid(T, 1e-3), m, 8, 0});

  double worst_identity = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& raw = re.raw.members[static_cast<std::size_t>(i)];
    const auto& beta = re.betas.members[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < re.raw.grid.size(); ++k) {
      const double lhs = beta.row(k).sum();
      const double rhs = raw.row(k).sum() - raw.row(0).sum();
      worst_identity = std::max(worst_identity, std::abs(lhs - rhs));
    }
  }

  const auto cm = center_of_mass(re);
  Eigen::VectorXd drift(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& p = cm.members[static_cast<std::size_t>(i)];
    drift[i] = p(p.rows() - 1, 0) - p(0, 0);
  }
  const double mean = drift.mean();
  const double var = (drift.array() - mean).square().sum() / static_cast<double>(m - 1);
  const double delta_bar = spec.deltas.mean();
  const double var_expect = T / 5.0;
  const double mean_band = 3.0 * std::sqrt(var_expect / static_cast<double>(m));
  const double var_band = 3.0 * var_expect * std::sqrt(2.0 / static_cast<double>(m - 1));

  const bool ok = worst_identity < 1e-9 && std::abs(mean - delta_bar * T) < mean_band &&
                  std::abs(var - var_expect) < var_band;
  verdict(8, "rank bookkeeping: beta identity and center-of-mass moments", ok,
          "max|sum beta - sum dX|=" + fmt(worst_identity) + ", mean=" + fmt(mean) + " (expect " +
              fmt(delta_bar * T) + "), var=" + fmt(var) + " (expect " + fmt(var_expect) + ")");
}

// 9. Cross-estimator local time: occupation vs SP on 2-particle gaps within
//    10% relative on the ensemble mean, under 5 minutes.
void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();
  RankModelSpec spec;
  spec.deltas = Eigen::Vector2d::Zero();
  spec.x0 = Eigen::Vector2d::Zero();
  const Eigen::Index m = 1000;
  const auto re = simulate_rank_model(spec, SimConfig{make_grid(1.0, 1e-4), m, 9, 0});
  const auto lt = rank_local_times(re, chamber_domain(2), 0.01);
  const double occ = lt.occupation_at_horizon().col(0).mean();
  const double sp = lt.sp_at_horizon().col(0).mean();
  const double rel = std::abs(occ - sp) / sp;
  const double elapsed = seconds_since(t0);
  verdict(9, "occupation vs SP local time within 10%", rel < 0.10 && elapsed < 300.0,
          "occ=" + fmt(occ) + ", sp=" + fmt(sp) + ", rel=" + fmt(rel) + ", " + fmt(elapsed) + "s");
}

// 10. Local-time tail experiment: negative slope with R^2 > 0.9 on the
//     diagnostic radii r >= 2 sqrt(2 log 2); C_fit finite for n in {2, 3, 5}.
void criterion_10() {
  bool ok = true;
  std::string detail;
  for (Eigen::Index n : {2, 3, 5}) {
    Thm1Config cfg;
    cfg.n = n;
    cfg.n_paths = 5000;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    cfg.master_seed = 10 + static_cast<std::uint64_t>(n);
    const auto rep = thm1_experiment(cfg);
    const bool this_ok = rep.diag_fit.points >= 3 && rep.diag_fit.slope < 0.0 &&
                         rep.diag_fit.r2 > 0.9 && std::isfinite(rep.fitted_C) &&
                         rep.fitted_C > 0.0;
    ok = ok && this_ok;
    detail += "n=" + std::to_string(n) + ": slope=" + fmt(rep.diag_fit.slope) +
              ", R2=" + fmt(rep.diag_fit.r2) + ", C_fit=" + fmt(rep.fitted_C) + "; ";
  }
  verdict(10, "local-time tails: sub-Gaussian decay, C_fit reported", ok, detail);
}

// 11. Determinism: identical config and seed give byte-identical CSV at any
//     thread count (exercised through the CLI binary).
void criterion_11() {
  const std::string bin = CONC_LAB_BIN;
  const fs::path d1 = fs::temp_directory_path() / "conclab_acc_det1";
  const fs::path d2 = fs::temp_directory_path() / "conclab_acc_det2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  const std::string args = " concentrate --thm1 --n 3 --paths 400 --seed 99 ";
  const int rc1 = std::system((bin + args + "--threads 1 --out " + d1.string() + " >/dev/null").c_str());
  const int rc2 = std::system((bin + args + "--threads 4 --out " + d2.string() + " >/dev/null").c_str());

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const bool same_csv = slurp(d1 / "tailreport.csv") == slurp(d2 / "tailreport.csv") &&
                        !slurp(d1 / "tailreport.csv").empty();
  const bool same_json = slurp(d1 / "tailreport.json") == slurp(d2 / "tailreport.json");
  const bool ok = rc1 == 0 && rc2 == 0 && same_csv && same_json;
  verdict(11, "byte-identical CLI outputs across thread counts", ok,
          same_csv ? "csv and json identical" : "outputs differ");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::cout << (g_failures == 0 ? "acceptance: all criteria passed"
                                : "acceptance: " + std::to_string(g_failures) + " criteria failed")
            << "\n";
  return g_failures == 0 ? 0 : 1;
}
