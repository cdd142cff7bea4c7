#pragma once

#include <Eigen/Dense>

#include "conclab/path.hpp"
#include "conclab/sde.hpp"

namespace conclab {

/// n interacting Brownian particles; the particle currently holding rank j
/// (counted from the top) receives drift delta_j.
struct RankModelSpec {
  Eigen::VectorXd deltas;  // delta_1..delta_n by rank
  Eigen::VectorXd x0;

  Eigen::Index n() const { return deltas.size(); }
  void validate() const;
};

/// Raw particles plus the rank bookkeeping derived from them.
struct RankEnsemble {
  Ensemble raw;      // X_i
  Ensemble ordered;  // X_(j), non-increasing in j at every grid point
  Ensemble betas;    // beta_j: cumulative increments of the rank-j holder
  Ensemble gaps;     // X_(j) - X_(j+1), n-1 components (empty members for n = 1)
};

/// Explicit Euler with the drift read off the ranks at each step's left
/// endpoint. Ties broken by particle index ascending.
RankEnsemble simulate_rank_model(const RankModelSpec& spec, const SimConfig& config);

/// Per grid point, the coordinates of each raw member sorted in
/// decreasing order.
Ensemble ordered_processes(const RankEnsemble& re);

/// beta_j accumulated as the increment of whichever particle holds rank j
/// at the step's left endpoint; beta_j(0) = 0.
Ensemble extract_beta(const RankEnsemble& re);

/// Per member, the scalar path (1/n) sum_i X_i(t).
Ensemble center_of_mass(const RankEnsemble& re);

/// Rank assignment at one state: result[j] = index of the particle holding
/// rank j (0-based, rank 0 = largest). Ties by particle index ascending.
void rank_assignment(const Eigen::VectorXd& state, std::vector<Eigen::Index>& out);

}  // namespace conclab
