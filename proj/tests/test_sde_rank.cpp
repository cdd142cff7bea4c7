#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "conclab/errors.hpp"
#include "conclab/metrics.hpp"
#include "conclab/rank.hpp"
#include "conclab/rng.hpp"
#include "conclab/sde.hpp"

using namespace conclab;

namespace {

SdeSystem scalar_system(DriftSpec b, DiffusionSpec s, double x0) {
  SdeSystem sys;
  sys.drifts = {std::move(b)};
  sys.diffusions = {std::move(s)};
  sys.x0 = Eigen::VectorXd::Constant(1, x0);
  return sys;
}

SimConfig config(double T, double dt, Eigen::Index paths, std::uint64_t seed) {
  return SimConfig{make_grid(T, dt), paths, seed, 0};
}

}  // namespace

TEST_CASE("euler: zero dynamics give a constant path") {
  const auto sys = scalar_system(DriftSpec::zero(), DiffusionSpec::constant(0.0), 5.0);
  const auto ens = euler_maruyama(sys, config(1.0, 0.1, 3, 1));
  for (const auto& m : ens.members) CHECK((m.array() == 5.0).all());
}

TEST_CASE("euler: pure drift integrates to the line mu t") {
  const double mu = 0.7;
  const auto sys = scalar_system(DriftSpec::constant(mu), DiffusionSpec::constant(0.0), 0.0);
  const auto ens = euler_maruyama(sys, config(1.0, 0.01, 1, 2));
  for (Eigen::Index k = 0; k < ens.grid.size(); ++k)
    CHECK(ens.members[0](k, 0) == doctest::Approx(mu * ens.grid.points[k]).epsilon(1e-12));
}

TEST_CASE("euler: Brownian moments at T = 1 sit in CLT bands") {
  const auto sys = scalar_system(DriftSpec::zero(), DiffusionSpec::constant(1.0), 0.0);
  const Eigen::Index m = 20000;
  const auto ens = euler_maruyama(sys, config(1.0, 1e-2, m, 3));
  Eigen::VectorXd terminal(m);
  for (Eigen::Index i = 0; i < m; ++i)
    terminal[i] = ens.members[static_cast<std::size_t>(i)](ens.grid.size() - 1, 0);
  const double mean = terminal.mean();
  const double var = (terminal.array() - mean).square().sum() / static_cast<double>(m - 1);
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(m)));
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("euler: path-dependent drift sees only its own history") {
  // Drift = running sup of the coordinate; just exercises the view plumbing.
  DriftSpec b{[](double, const PathView& h) { return -h.sup_abs(); }, 1.0};
  const auto sys = scalar_system(std::move(b), DiffusionSpec::constant(0.5), 1.0);
  const auto ens = euler_maruyama(sys, config(1.0, 0.05, 4, 4));
  CHECK(ens.members.size() == 4);
}

TEST_CASE("euler: sigma outside [0, kappa] aborts with a diagnostic naming the step") {
  DiffusionSpec bad{[](double t, double) { return t < 0.5 ? 0.5 : 2.0; }, 0.0, 1.0};
  const auto sys = scalar_system(DriftSpec::zero(), std::move(bad), 0.0);
  try {
    euler_maruyama(sys, config(1.0, 0.1, 2, 5));
    FAIL("expected CertificationError");
  } catch (const CertificationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("step") != std::string::npos);
    CHECK(msg.find("sigma") != std::string::npos);
  }
}

TEST_CASE("determinism: ensembles are bitwise stable across thread counts") {
  const auto sys = scalar_system(DriftSpec::constant(0.1), DiffusionSpec::constant(1.0), 0.0);
  const auto cfg = config(1.0, 0.01, 64, 6);

  setenv("CONC_LAB_THREADS", "1", 1);
  const auto serial = euler_maruyama(sys, cfg);
  setenv("CONC_LAB_THREADS", "4", 1);
  const auto parallel = euler_maruyama(sys, cfg);
  unsetenv("CONC_LAB_THREADS");

  for (std::size_t i = 0; i < serial.members.size(); ++i)
    CHECK((serial.members[i].array() == parallel.members[i].array()).all());
}

TEST_CASE("batched member offsets reproduce the monolithic run") {
  RankModelSpec spec;
  spec.deltas = Eigen::Vector3d(1.0, 0.0, -1.0);
  spec.x0 = Eigen::Vector3d::Zero();
  const auto whole = simulate_rank_model(spec, config(1.0, 0.05, 10, 7));

  SimConfig part = config(1.0, 0.05, 4, 7);
  part.member_offset = 6;
  const auto tail = simulate_rank_model(spec, part);
  for (Eigen::Index i = 0; i < 4; ++i)
    CHECK((tail.raw.members[static_cast<std::size_t>(i)].array() ==
           whole.raw.members[static_cast<std::size_t>(i + 6)].array())
              .all());
}

TEST_CASE("synchronous coupling: identical systems produce identical ensembles") {
  const auto sys = scalar_system(DriftSpec::constant(0.3), DiffusionSpec::constant(1.0), 0.0);
  const auto [a, b] = synchronous_couple(sys, sys, config(1.0, 0.05, 8, 8));
  for (std::size_t i = 0; i < a.members.size(); ++i)
    CHECK((a.members[i].array() == b.members[i].array()).all());
}

TEST_CASE("synchronous coupling: additive drift difference is the line mu t") {
  const double mu = 0.9;
  const auto base = scalar_system(DriftSpec::zero(), DiffusionSpec::constant(1.0), 0.0);
  const auto drifted = scalar_system(DriftSpec::constant(mu), DiffusionSpec::constant(1.0), 0.0);
  const auto [a, b] = synchronous_couple(base, drifted, config(1.0, 1e-3, 16, 9));
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    const Eigen::VectorXd diff = b.members[i].col(0) - a.members[i].col(0);
    for (Eigen::Index k = 0; k < a.grid.size(); ++k)
      CHECK(diff[k] == doctest::Approx(mu * a.grid.points[k]).epsilon(1e-10));
  }
}

TEST_CASE("synchronous coupling rejects dimension mismatch") {
  const auto sys1 = scalar_system(DriftSpec::zero(), DiffusionSpec::constant(1.0), 0.0);
  SdeSystem sys2 = sys1;
  sys2.drifts.push_back(DriftSpec::zero());
  sys2.diffusions.push_back(DiffusionSpec::constant(1.0));
  sys2.x0 = Eigen::VectorXd::Zero(2);
  CHECK_THROWS(synchronous_couple(sys1, sys2, config(1.0, 0.1, 2, 10)));
}

TEST_CASE("rank model with one particle reduces bitwise to euler_maruyama") {
  const double mu = -0.4;
  RankModelSpec spec;
  spec.deltas = Eigen::VectorXd::Constant(1, mu);
  spec.x0 = Eigen::VectorXd::Constant(1, 2.0);
  const auto cfg = config(1.0, 0.01, 16, 11);
  const auto re = simulate_rank_model(spec, cfg);
  const auto em = euler_maruyama(
      scalar_system(DriftSpec::constant(mu), DiffusionSpec::constant(1.0), 2.0), cfg);
  for (std::size_t i = 0; i < re.raw.members.size(); ++i)
    CHECK((re.raw.members[i].array() == em.members[i].array()).all());

  // beta_1 = X_1 - X_1(0) for a single particle.
  for (std::size_t i = 0; i < re.raw.members.size(); ++i)
    CHECK((re.betas.members[i].col(0) -
           (re.raw.members[i].col(0).array() - 2.0).matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("rank bookkeeping invariants on a mixed-drift run") {
  RankModelSpec spec;
  spec.deltas = Eigen::VectorXd(4);
  spec.deltas << 2.0, 1.0, 0.0, -1.0;
  spec.x0 = Eigen::VectorXd::Zero(4);
  const auto re = simulate_rank_model(spec, config(1.0, 0.01, 50, 12));

  for (Eigen::Index m = 0; m < re.raw.size(); ++m) {
    const auto& raw = re.raw.members[static_cast<std::size_t>(m)];
    const auto& ord = re.ordered.members[static_cast<std::size_t>(m)];
    const auto& beta = re.betas.members[static_cast<std::size_t>(m)];
    const auto& gaps = re.gaps.members[static_cast<std::size_t>(m)];
    for (Eigen::Index k = 0; k < re.raw.grid.size(); ++k) {
      // Ordered rows are sorted permutations of raw rows.
      std::vector<double> r(raw.row(k).begin(), raw.row(k).end());
      std::sort(r.begin(), r.end(), std::greater<double>());
      for (Eigen::Index j = 0; j < 4; ++j) {
        CHECK(ord(k, j) == r[static_cast<std::size_t>(j)]);
        if (j > 0) CHECK(ord(k, j) <= ord(k, j - 1));
      }
      for (Eigen::Index j = 0; j + 1 < 4; ++j)
        CHECK(gaps(k, j) == doctest::Approx(ord(k, j) - ord(k, j + 1)).epsilon(1e-15));
      // Sum of betas equals total displacement.
      const double lhs = beta.row(k).sum();
      const double rhs = raw.row(k).sum() - raw.row(0).sum();
      CHECK(std::abs(lhs - rhs) < 1e-9);
    }
  }
}

TEST_CASE("ordered_processes matches an independent per-point sort oracle") {
  RankModelSpec spec;
  spec.deltas = Eigen::Vector3d(0.5, 0.0, -0.5);
  spec.x0 = Eigen::Vector3d(1.0, 0.0, -1.0);
  const auto re = simulate_rank_model(spec, config(1.0, 0.05, 20, 13));
  const auto ord = ordered_processes(re);
  for (Eigen::Index m = 0; m < re.raw.size(); ++m) {
    const auto& raw = re.raw.members[static_cast<std::size_t>(m)];
    for (Eigen::Index k = 0; k < re.raw.grid.size(); ++k) {
      // Selection-sort oracle, distinct from std::sort.
      std::vector<double> row(raw.row(k).begin(), raw.row(k).end());
      for (std::size_t a = 0; a < row.size(); ++a) {
        std::size_t best = a;
        for (std::size_t b = a + 1; b < row.size(); ++b)
          if (row[b] > row[best]) best = b;
        std::swap(row[a], row[best]);
        CHECK(ord.members[static_cast<std::size_t>(m)](k, static_cast<Eigen::Index>(a)) ==
              row[a]);
      }
    }
  }
}

TEST_CASE("beta extraction: driftless betas have identity covariance") {
  RankModelSpec spec;
  spec.deltas = Eigen::Vector3d::Zero();
  spec.x0 = Eigen::Vector3d::Zero();
  const Eigen::Index m = 20000;
  const auto re = simulate_rank_model(spec, config(1.0, 0.02, m, 14));

  Eigen::MatrixXd terminal(m, 3);
  for (Eigen::Index i = 0; i < m; ++i)
    terminal.row(i) = re.betas.members[static_cast<std::size_t>(i)].bottomRows(1);
  const Eigen::RowVectorXd mean = terminal.colwise().mean();
  const Eigen::MatrixXd centered = terminal.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(m - 1);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)) < 0.05);
}

TEST_CASE("two-particle gap matches a folded-walk oracle in the mean") {
  RankModelSpec spec;
  spec.deltas = Eigen::Vector2d(-1.0, 1.0);  // leader pulled down: gap drift -2
  spec.x0 = Eigen::Vector2d::Zero();
  const Eigen::Index m = 20000;
  const double dt = 1e-3;
  const auto re = simulate_rank_model(spec, config(1.0, dt, m, 15));

  Eigen::VectorXd gap_terminal(m);
  for (Eigen::Index i = 0; i < m; ++i)
    gap_terminal[i] = re.gaps.members[static_cast<std::size_t>(i)](re.raw.grid.size() - 1, 0);

  // Independent folded Euler walk for the gap: |G + mu h + sigma sqrt(h) Z|,
  // mu = -2, sigma = sqrt(2) -- the same reflection convention the
  // rank-switching dynamics realize for two particles.
  const CounterRng rng(1515, RngStream::Sampling);
  const auto grid = re.raw.grid;
  Eigen::VectorXd oracle(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double g = 0.0;
    for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
      const double h = grid.delta(k);
      g = std::abs(g - 2.0 * h + std::sqrt(2.0 * h) *
                                     rng.normal(static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(k), 0));
    }
    oracle[i] = g;
  }

  const double mean_gap = gap_terminal.mean();
  const double mean_oracle = oracle.mean();
  const double var_gap = (gap_terminal.array() - mean_gap).square().mean();
  const double var_oracle = (oracle.array() - mean_oracle).square().mean();
  const double band =
      3.0 * std::sqrt((var_gap + var_oracle) / static_cast<double>(m));
  CHECK(std::abs(mean_gap - mean_oracle) < band);
}

TEST_CASE("coupled rank models stay within the integrated drift difference") {
  RankModelSpec zero, spread;
  zero.deltas = Eigen::Vector2d::Zero();
  zero.x0 = Eigen::Vector2d::Zero();
  spread.deltas = Eigen::Vector2d(1.0, -1.0);
  spread.x0 = Eigen::Vector2d::Zero();
  const auto cfg = config(1.0, 1e-3, 200, 16);
  const auto a = simulate_rank_model(zero, cfg);
  const auto b = simulate_rank_model(spread, cfg);  // same seed: shared noise

  const double cap = std::sqrt(2.0) * 1.0 * 1.0;  // sqrt(2) T max|delta|
  for (Eigen::Index i = 0; i < a.raw.size(); ++i) {
    const double d = metric_eval(PathMetric::averaged_uniform(), a.raw.member(i), b.raw.member(i));
    CHECK(d <= cap);
  }
}

TEST_CASE("center of mass: identity for n = 1 and moments for n = 4") {
  RankModelSpec one;
  one.deltas = Eigen::VectorXd::Constant(1, 0.3);
  one.x0 = Eigen::VectorXd::Zero(1);
  const auto re1 = simulate_rank_model(one, config(1.0, 0.1, 5, 17));
  const auto cm1 = center_of_mass(re1);
  for (std::size_t i = 0; i < cm1.members.size(); ++i)
    CHECK((cm1.members[i] - re1.raw.members[i]).cwiseAbs().maxCoeff() == 0.0);

  RankModelSpec four;
  four.deltas = Eigen::VectorXd(4);
  four.deltas << 2.0, 1.0, 0.0, -1.0;  // mean drift 0.5
  four.x0 = Eigen::VectorXd::Zero(4);
  const Eigen::Index m = 20000;
  const auto re4 = simulate_rank_model(four, config(1.0, 0.01, m, 18));
  const auto cm4 = center_of_mass(re4);
  Eigen::VectorXd drift(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& path = cm4.members[static_cast<std::size_t>(i)];
    drift[i] = path(path.rows() - 1, 0) - path(0, 0);
  }
  const double mean = drift.mean();
  const double var = (drift.array() - mean).square().sum() / static_cast<double>(m - 1);
  CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(0.25 / static_cast<double>(m)));
  CHECK(std::abs(var - 0.25) < 0.05 * 0.25);
}
