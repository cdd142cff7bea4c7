#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "conclab/metrics.hpp"
#include "conclab/path.hpp"
#include "conclab/skorokhod.hpp"
#include "conclab/stats.hpp"

namespace conclab {

/// A path functional with a declared Lipschitz constant against a named
/// metric. Declarations are checked empirically by randomized probes.
struct LipschitzFunctional {
  std::function<double(const MultiPath&)> evaluator;
  double alpha = 0.0;
  PathMetric metric;
};

/// Time-indexed family f(t) sharing one Lipschitz constant.
struct TimeIndexedFunctional {
  std::function<double(double t, const MultiPath&)> evaluator;
  double alpha = 0.0;
  PathMetric metric;
};

/// Median-centred tail curve with the matching theoretical bound.
struct TailReport {
  std::string statistic_name;
  double median = 0.0;
  Eigen::VectorXd r_grid;
  Eigen::VectorXd empirical_tail;  // P(|x - median| >= r * scale)
  Eigen::VectorXd bound;
  double scale = 1.0;    // threshold multiplier (n^{5/2} for the local-time experiment)
  double r_valid = 0.0;  // below this r the bound does not apply
  double fitted_C = 0.0;
  Eigen::Index n_samples = 0;
  // Sub-Gaussianity diagnostic: log tail vs r^2 at unscaled radii.
  Eigen::VectorXd diag_r, diag_tail;
  Regression diag_fit;
};

/// Lower median plus exceedance counts at each radius; bound fields left
/// empty for the caller to fill.
TailReport median_and_tails(const Eigen::VectorXd& samples, const Eigen::VectorXd& r_grid);

/// 2 exp(-r^2 / 8C); valid for r >= 2 sqrt(2 C log 2).
std::pair<double, bool> bound_preq(double C, double r);

/// exp(-r^2 / (8C (1 + 4 |L|_Phi))); valid for r >= 2 sqrt(2C log 2 + 4C |L|_1).
std::pair<double, bool> bound_perturbed(double C, double l1, double lphi, double r);

struct RandomizedStartBound {
  double value = 0.0;   // 2 exp(-r^2 / 32C) + mu_tail
  double capped = 0.0;  // min(1, value) for reporting
};

/// Mixture bound for randomized starting points; requires r >= 2 sqrt(2 log 2).
RandomizedStartBound bound_randomized_start(double C, double r, double mu_tail);

/// sup over the grid of a 1-Lipschitz family is Lipschitz with the same constant.
LipschitzFunctional lipschitz_sup(const TimeIndexedFunctional& family);

/// phi o f is Lipschitz with constant phi_lip * alpha.
LipschitzFunctional lipschitz_compose(std::function<double(double)> phi, double phi_lip,
                                      const LipschitzFunctional& f);

/// g(t) = int_0^t f(u) du by left-point quadrature; constant scales by T.
TimeIndexedFunctional lipschitz_integrate(const TimeIndexedFunctional& family, double T);

/// Declares alpha = n * per_coordinate_alpha under the averaged-uniform
/// metric (1 when the per-coordinate constant is 1/n).
LipschitzFunctional lipschitz_from_coordinates(std::function<double(const MultiPath&)> f,
                                               double per_coordinate_alpha, Eigen::Index n);

/// Smooth random probe path: finite Fourier series with standard normal
/// coefficients, 8 harmonics per coordinate.
MultiPath random_smooth_path(const TimeGrid& grid, Eigen::Index dim, std::uint64_t seed,
                             std::uint64_t member);

/// Largest observed |f(x)-f(y)| / d(x,y) over random probe pairs.
double probe_lipschitz_ratio(const LipschitzFunctional& f, const TimeGrid& grid,
                             Eigen::Index dim, int pairs, std::uint64_t seed);

/// Same probe but perturbing a single coordinate, returning the largest
/// ratio against the sup distance of that coordinate.
double probe_coordinate_ratio(const std::function<double(const MultiPath&)>& f,
                              const TimeGrid& grid, Eigen::Index dim, int pairs,
                              std::uint64_t seed);

/// chi = max_j L_{j,j+1}(T) per path.
Eigen::VectorXd chi_statistic(const Eigen::MatrixXd& local_times);

struct Thm1Config {
  Eigen::Index n = 2;
  Eigen::VectorXd deltas;  // empty means all zero
  double T = 1.0;
  double dt = 1e-3;
  Eigen::Index n_paths = 5000;
  std::uint64_t master_seed = 0;
  Eigen::VectorXd r_grid;        // empty means 16 steps of 0.1 from 2 sqrt(2 log 2)
  double scale_exponent = 2.5;   // thresholds r * n^scale_exponent
  LocalTimeMethod method = LocalTimeMethod::SkorokhodMap;
  double eps = 0.01;             // occupation estimator width
  Eigen::Index batch = 500;      // members simulated per batch
};

/// chi samples for the rank-model local-time experiment.
Eigen::VectorXd thm1_chi_samples(const Thm1Config& cfg);

/// Full tail report: scaled empirical tails, fitted-constant bound curve
/// 2 exp(-r^2 / (C_fit T)), and the unscaled log-tail regression diagnostic.
TailReport thm1_experiment(const Thm1Config& cfg);

/// Evaluates sup-type martingale samples over an ensemble and fills a
/// tail report against the 2 exp(-r^2 / 8 C alpha^2) bound.
TailReport martingale_concentration_check(const LipschitzFunctional& terminal,
                                          const Ensemble& ensemble, double C,
                                          const Eigen::VectorXd& r_grid);

/// Smallest constant making the bound shape dominate the clamped tails on
/// the valid range: max r^2 / (denom * log(2 / clamped tail)).
double fit_tail_constant(const Eigen::VectorXd& r_grid, const Eigen::VectorXd& tails,
                         double denom, Eigen::Index n_samples, double r_min);

Eigen::VectorXd default_r_grid();

}  // namespace conclab
