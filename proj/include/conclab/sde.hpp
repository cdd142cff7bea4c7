#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "conclab/path.hpp"

namespace conclab {

/// Read-only window onto the first k+1 samples of a scalar path. Drift
/// functionals receive one of these, so they structurally cannot peek
/// past their own time argument.
class PathView {
 public:
  PathView(const TimeGrid& grid, const double* values, Eigen::Index count)
      : grid_(&grid), values_(values), count_(count) {}

  Eigen::Index size() const { return count_; }
  double time(Eigen::Index k) const { return grid_->points[k]; }
  double value(Eigen::Index k) const { return values_[k]; }
  double current() const { return values_[count_ - 1]; }
  double sup_abs() const {
    double m = 0.0;
    for (Eigen::Index k = 0; k < count_; ++k) m = std::max(m, std::abs(values_[k]));
    return m;
  }

 private:
  const TimeGrid* grid_;
  const double* values_;
  Eigen::Index count_;
};

/// Path-dependent drift b(t, omega) with a declared (not verified)
/// Lipschitz constant K1 in the running sup norm.
struct DriftSpec {
  std::function<double(double t, const PathView& history)> evaluator;
  double lipschitz = 0.0;

  static DriftSpec zero();
  static DriftSpec constant(double mu);
};

/// State-dependent diffusion sigma(t, x), declared Lipschitz constant K2,
/// and hard bound 0 <= sigma <= kappa asserted on every sampled input.
struct DiffusionSpec {
  std::function<double(double t, double x)> evaluator;
  double lipschitz = 0.0;
  double bound = 1.0;  // kappa

  static DiffusionSpec constant(double sigma);
};

/// System of coordinate-wise SDEs dX_i = b_i(t, X_i) dt + sigma_i(t, X_i(t)) dW_i.
struct SdeSystem {
  std::vector<DriftSpec> drifts;
  std::vector<DiffusionSpec> diffusions;
  Eigen::VectorXd x0;

  Eigen::Index dim() const { return x0.size(); }
  void validate() const;
};

struct SimConfig {
  TimeGrid grid;
  Eigen::Index n_paths = 1;
  std::uint64_t master_seed = 0;
  /// Global index of the first member; batched runs with offsets
  /// reproduce a monolithic run bit for bit.
  std::uint64_t member_offset = 0;
};

/// Explicit Euler: X(t+h) = X(t) + b(t, X|[0,t]) h + sigma(t, X(t)) sqrt(h) Z.
/// Deterministic given (system, config); parallel across members.
Ensemble euler_maruyama(const SdeSystem& system, const SimConfig& config);

/// Both systems driven by identical Gaussian increments, member by member.
std::pair<Ensemble, Ensemble> synchronous_couple(const SdeSystem& a, const SdeSystem& b,
                                                 const SimConfig& config);

}  // namespace conclab
