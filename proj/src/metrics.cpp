#include "conclab/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace conclab {

namespace {

void require_pair(const MultiPath& a, const MultiPath& b) {
  if (!grids_equal(a.grid, b.grid))
    throw std::invalid_argument("metric_eval: paths on different grids");
  if (a.dim() != b.dim())
    throw std::invalid_argument("metric_eval: dimension mismatch");
}

double uniform_up_to(const MultiPath& a, const MultiPath& b, double t_cap) {
  double d = 0.0;
  for (Eigen::Index k = 0; k < a.grid.size(); ++k) {
    if (a.grid.points[k] > t_cap + 1e-12) break;
    d = std::max(d, (a.values.row(k) - b.values.row(k)).cwiseAbs().maxCoeff());
  }
  return d;
}

}  // namespace

PathMetric PathMetric::locally_uniform(Eigen::VectorXd weights) {
  if (weights.size() == 0)
    throw std::invalid_argument("locally_uniform: weights required");
  if ((weights.array() <= 0.0).any())
    throw std::invalid_argument("locally_uniform: weights must be positive");
  return {MetricKind::LocallyUniform, std::move(weights)};
}

Eigen::VectorXd stopped_weights(double K, int count) {
  if (count < 1) throw std::invalid_argument("stopped_weights: count must be >= 1");
  Eigen::VectorXd c(count);
  for (int k = 1; k <= count; ++k)
    c[k - 1] = std::exp(-2.0 * K * K * (k + 4.0)) / std::sqrt(static_cast<double>(k));
  return c;
}

double metric_eval(const PathMetric& metric, const MultiPath& a, const MultiPath& b) {
  require_pair(a, b);
  const Eigen::Index n = a.dim();

  switch (metric.kind) {
    case MetricKind::Uniform:
      return (a.values - b.values).cwiseAbs().maxCoeff();

    case MetricKind::AveragedUniform: {
      const Eigen::VectorXd sups = (a.values - b.values).cwiseAbs().colwise().maxCoeff();
      return std::sqrt(sups.squaredNorm() / static_cast<double>(n));
    }

    case MetricKind::UniformEuclidean: {
      const Eigen::VectorXd row_sq = (a.values - b.values).rowwise().squaredNorm();
      return std::sqrt(row_sq.maxCoeff() / static_cast<double>(n));
    }

    case MetricKind::LocallyUniform: {
      const int blocks = static_cast<int>(std::ceil(a.grid.horizon - 1e-12));
      if (metric.weights.size() < std::max(blocks, 1))
        throw std::invalid_argument(
            "metric_eval: LocallyUniform needs a weight per unit block, got " +
            std::to_string(metric.weights.size()) + " for horizon " +
            std::to_string(a.grid.horizon));
      double rho = 0.0;
      for (int k = 1; k <= std::max(blocks, 1); ++k) {
        const double dk = uniform_up_to(a, b, std::min<double>(k, a.grid.horizon));
        rho = std::max(rho, metric.weights[k - 1] * dk / (1.0 + dk));
      }
      return rho;
    }
  }
  throw std::logic_error("metric_eval: unknown metric kind");
}

DominanceReport metric_dominance_check(const MultiPath& a, const MultiPath& b) {
  DominanceReport r;
  r.uniform_euclidean = metric_eval(PathMetric::uniform_euclidean(), a, b);
  r.averaged_uniform = metric_eval(PathMetric::averaged_uniform(), a, b);
  r.holds = r.uniform_euclidean <= r.averaged_uniform + 1e-12;
  return r;
}

}  // namespace conclab
