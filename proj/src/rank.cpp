#include "conclab/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "conclab/parallel.hpp"
#include "conclab/rng.hpp"

namespace conclab {

void RankModelSpec::validate() const {
  if (deltas.size() < 1) throw std::invalid_argument("RankModelSpec: n must be >= 1");
  if (x0.size() != deltas.size())
    throw std::invalid_argument("RankModelSpec: x0 and deltas must have equal length");
}

void rank_assignment(const Eigen::VectorXd& state, std::vector<Eigen::Index>& out) {
  const Eigen::Index n = state.size();
  out.resize(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), Eigen::Index{0});
  std::stable_sort(out.begin(), out.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return state[a] > state[b]; });
}

RankEnsemble simulate_rank_model(const RankModelSpec& spec, const SimConfig& config) {
  spec.validate();
  if (config.n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be >= 1");
  const Eigen::Index n = spec.n();
  const TimeGrid& grid = config.grid;

  RankEnsemble re;
  re.raw.grid = grid;
  re.raw.seeds.master_seed = config.master_seed;
  re.raw.seeds.member_streams.resize(static_cast<std::size_t>(config.n_paths));
  re.raw.members.resize(static_cast<std::size_t>(config.n_paths));

  const CounterRng rng(config.master_seed, RngStream::Increments);

  parallel_for(config.n_paths, [&](std::int64_t m) {
    const std::uint64_t global = config.member_offset + static_cast<std::uint64_t>(m);
    re.raw.seeds.member_streams[static_cast<std::size_t>(m)] = global;
    Eigen::MatrixXd& X = re.raw.members[static_cast<std::size_t>(m)];
    X.resize(grid.size(), n);
    X.row(0) = spec.x0.transpose();
    std::vector<Eigen::Index> perm;
    Eigen::VectorXd state(n);
    for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
      const double h = grid.delta(k);
      const double sqrt_h = std::sqrt(h);
      state = X.row(k).transpose();
      rank_assignment(state, perm);
      // perm[j] holds rank j; invert to drift per particle.
      X.row(k + 1) = X.row(k);
      for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index i = perm[static_cast<std::size_t>(j)];
        const double z = rng.normal(global, static_cast<std::uint64_t>(k),
                                    static_cast<std::uint32_t>(i));
        X(k + 1, i) = X(k, i) + spec.deltas[j] * h + 1.0 * sqrt_h * z;
      }
    }
  });

  re.ordered = ordered_processes(re);
  re.betas = extract_beta(re);

  re.gaps.grid = grid;
  re.gaps.seeds = re.raw.seeds;
  re.gaps.members.resize(re.raw.members.size());
  parallel_for(re.raw.size(), [&](std::int64_t m) {
    const Eigen::MatrixXd& ord = re.ordered.members[static_cast<std::size_t>(m)];
    Eigen::MatrixXd& g = re.gaps.members[static_cast<std::size_t>(m)];
    g.resize(grid.size(), std::max<Eigen::Index>(n - 1, 0));
    if (n > 1) g = ord.leftCols(n - 1) - ord.rightCols(n - 1);
  });
  return re;
}

Ensemble ordered_processes(const RankEnsemble& re) {
  Ensemble out;
  out.grid = re.raw.grid;
  out.seeds = re.raw.seeds;
  out.members.resize(re.raw.members.size());
  parallel_for(re.raw.size(), [&](std::int64_t m) {
    const Eigen::MatrixXd& X = re.raw.members[static_cast<std::size_t>(m)];
    Eigen::MatrixXd& O = out.members[static_cast<std::size_t>(m)];
    O.resize(X.rows(), X.cols());
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index k = 0; k < X.rows(); ++k) {
      for (Eigen::Index i = 0; i < X.cols(); ++i) row[static_cast<std::size_t>(i)] = X(k, i);
      std::sort(row.begin(), row.end(), std::greater<double>());
      for (Eigen::Index j = 0; j < X.cols(); ++j) O(k, j) = row[static_cast<std::size_t>(j)];
    }
  });
  return out;
}

Ensemble extract_beta(const RankEnsemble& re) {
  Ensemble out;
  out.grid = re.raw.grid;
  out.seeds = re.raw.seeds;
  out.members.resize(re.raw.members.size());
  parallel_for(re.raw.size(), [&](std::int64_t m) {
    const Eigen::MatrixXd& X = re.raw.members[static_cast<std::size_t>(m)];
    Eigen::MatrixXd& B = out.members[static_cast<std::size_t>(m)];
    B.resize(X.rows(), X.cols());
    B.row(0).setZero();
    std::vector<Eigen::Index> perm;
    Eigen::VectorXd state(X.cols());
    for (Eigen::Index k = 0; k + 1 < X.rows(); ++k) {
      state = X.row(k).transpose();
      rank_assignment(state, perm);
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const Eigen::Index i = perm[static_cast<std::size_t>(j)];
        B(k + 1, j) = B(k, j) + (X(k + 1, i) - X(k, i));
      }
    }
  });
  return out;
}

Ensemble center_of_mass(const RankEnsemble& re) {
  Ensemble out;
  out.grid = re.raw.grid;
  out.seeds = re.raw.seeds;
  out.members.resize(re.raw.members.size());
  parallel_for(re.raw.size(), [&](std::int64_t m) {
    const Eigen::MatrixXd& X = re.raw.members[static_cast<std::size_t>(m)];
    out.members[static_cast<std::size_t>(m)] = X.rowwise().mean();
  });
  return out;
}

}  // namespace conclab
