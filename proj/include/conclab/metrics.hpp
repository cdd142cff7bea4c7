#pragma once

#include <Eigen/Dense>

#include "conclab/path.hpp"

namespace conclab {

/// The four path-space metrics in play.
///
///   Uniform           sup_t max_i |a_i - b_i|          (plain sup for n = 1)
///   AveragedUniform   sqrt( (1/n) sum_i sup_t |a_i - b_i|^2 )
///   UniformEuclidean  sup_t sqrt( (1/n) sum_i (a_i(t) - b_i(t))^2 )
///   LocallyUniform    max_k c_k d_k / (1 + d_k), d_k the Uniform distance on [0, k]
enum class MetricKind { Uniform, AveragedUniform, UniformEuclidean, LocallyUniform };

struct PathMetric {
  MetricKind kind = MetricKind::Uniform;
  Eigen::VectorXd weights;  // LocallyUniform only: weights[k-1] = c_k for block [0, k]

  static PathMetric uniform() { return {MetricKind::Uniform, {}}; }
  static PathMetric averaged_uniform() { return {MetricKind::AveragedUniform, {}}; }
  static PathMetric uniform_euclidean() { return {MetricKind::UniformEuclidean, {}}; }
  static PathMetric locally_uniform(Eigen::VectorXd weights);
};

/// Weight rule c_k = k^{-1/2} exp(-2 K^2 (k + 4)) that pins the stopped-law
/// constant at 4 kappa^2.
Eigen::VectorXd stopped_weights(double K, int count);

double metric_eval(const PathMetric& metric, const MultiPath& a, const MultiPath& b);

struct DominanceReport {
  double uniform_euclidean = 0.0;
  double averaged_uniform = 0.0;
  bool holds = false;  // uniform_euclidean <= averaged_uniform
};

DominanceReport metric_dominance_check(const MultiPath& a, const MultiPath& b);

}  // namespace conclab
