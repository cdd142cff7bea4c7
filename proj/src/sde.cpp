#include "conclab/sde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "conclab/errors.hpp"
#include "conclab/parallel.hpp"
#include "conclab/rng.hpp"

namespace conclab {

DriftSpec DriftSpec::zero() {
  return {[](double, const PathView&) { return 0.0; }, 0.0};
}

DriftSpec DriftSpec::constant(double mu) {
  return {[mu](double, const PathView&) { return mu; }, 0.0};
}

DiffusionSpec DiffusionSpec::constant(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("DiffusionSpec: sigma must be >= 0");
  return {[sigma](double, double) { return sigma; }, 0.0, std::max(sigma, 1e-300)};
}

void SdeSystem::validate() const {
  const auto n = static_cast<std::size_t>(x0.size());
  if (n == 0) throw std::invalid_argument("SdeSystem: empty system");
  if (drifts.size() != n || diffusions.size() != n)
    throw std::invalid_argument("SdeSystem: coefficient count does not match dimension");
  for (const auto& d : drifts)
    if (!d.evaluator) throw std::invalid_argument("SdeSystem: missing drift evaluator");
  for (const auto& s : diffusions) {
    if (!s.evaluator) throw std::invalid_argument("SdeSystem: missing diffusion evaluator");
    if (!(s.bound > 0.0)) throw std::invalid_argument("SdeSystem: kappa must be > 0");
  }
}

namespace {

// One member trajectory written into out ((M+1) x n, column-major so each
// coordinate's history is contiguous for PathView).
void simulate_member(const SdeSystem& sys, const SimConfig& cfg, const CounterRng& rng,
                     std::uint64_t global_member, Eigen::MatrixXd& out) {
  const TimeGrid& grid = cfg.grid;
  const Eigen::Index n = sys.dim();
  out.resize(grid.size(), n);
  out.row(0) = sys.x0.transpose();

  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
    const double t = grid.points[k];
    const double h = grid.delta(k);
    const double sqrt_h = std::sqrt(h);
    for (Eigen::Index i = 0; i < n; ++i) {
      const PathView history(grid, out.col(i).data(), k + 1);
      const double b = sys.drifts[static_cast<std::size_t>(i)].evaluator(t, history);
      const double kappa = sys.diffusions[static_cast<std::size_t>(i)].bound;
      const double s = sys.diffusions[static_cast<std::size_t>(i)].evaluator(t, out(k, i));
      if (!(s >= 0.0) || s > kappa * (1.0 + 1e-12))
        throw CertificationError(
            "euler_maruyama: sigma=" + std::to_string(s) + " outside [0, " +
            std::to_string(kappa) + "] at step " + std::to_string(k) + " (t=" +
            std::to_string(t) + "), member " + std::to_string(global_member) +
            ", coordinate " + std::to_string(i));
      const double z = rng.normal(global_member, static_cast<std::uint64_t>(k),
                                  static_cast<std::uint32_t>(i));
      out(k + 1, i) = out(k, i) + b * h + s * sqrt_h * z;
    }
  }
}

SeedLineage lineage(const SimConfig& cfg) {
  SeedLineage s;
  s.master_seed = cfg.master_seed;
  s.member_streams.resize(static_cast<std::size_t>(cfg.n_paths));
  for (Eigen::Index m = 0; m < cfg.n_paths; ++m)
    s.member_streams[static_cast<std::size_t>(m)] = cfg.member_offset + static_cast<std::uint64_t>(m);
  return s;
}

}  // namespace

Ensemble euler_maruyama(const SdeSystem& system, const SimConfig& config) {
  system.validate();
  if (config.n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");

  Ensemble ens;
  ens.grid = config.grid;
  ens.seeds = lineage(config);
  ens.members.resize(static_cast<std::size_t>(config.n_paths));
  const CounterRng rng(config.master_seed, RngStream::Increments);

  parallel_for(config.n_paths, [&](std::int64_t m) {
    const std::uint64_t global = config.member_offset + static_cast<std::uint64_t>(m);
    simulate_member(system, config, rng, global, ens.members[static_cast<std::size_t>(m)]);
  });
  return ens;
}

std::pair<Ensemble, Ensemble> synchronous_couple(const SdeSystem& a, const SdeSystem& b,
                                                 const SimConfig& config) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim())
    throw std::invalid_argument("synchronous_couple: dimension mismatch");
  // Same seed, same stream, same counters: identical increments by construction.
  Ensemble ea = euler_maruyama(a, config);
  Ensemble eb = euler_maruyama(b, config);
  return {std::move(ea), std::move(eb)};
}

}  // namespace conclab
