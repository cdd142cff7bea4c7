#include "conclab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "conclab/parallel.hpp"

namespace conclab {

std::pair<std::vector<Eigen::Index>, double> solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("solve_assignment: square matrix required");
  const Eigen::Index m = cost.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Shortest augmenting paths with dual potentials (1-based sentinels).
  std::vector<double> u(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<Eigen::Index> match(static_cast<std::size_t>(m) + 1, 0);  // column -> row
  std::vector<Eigen::Index> way(static_cast<std::size_t>(m) + 1, 0);

  for (Eigen::Index i = 1; i <= m; ++i) {
    match[0] = i;
    Eigen::Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Eigen::Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = kInf;
      Eigen::Index j1 = -1;
      for (Eigen::Index j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(m), -1);
  for (Eigen::Index j = 1; j <= m; ++j)
    assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) total += cost(i, assignment[static_cast<std::size_t>(i)]);
  return {std::move(assignment), total};
}

Eigen::MatrixXd transport_cost_matrix(const Ensemble& a, const Ensemble& b, int p,
                                      const PathMetric& metric) {
  require_compatible(a, b);
  const Eigen::Index m = a.size();
  Eigen::MatrixXd cost(m, m);
  parallel_for(m, [&](std::int64_t i) {
    const MultiPath ai = a.member(i);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d = metric_eval(metric, ai, b.member(j));
      cost(i, j) = (p == 1) ? d : d * d;
    }
  });
  return cost;
}

std::pair<double, CouplingPlan> wasserstein_exact(const Ensemble& a, const Ensemble& b, int p,
                                                  const PathMetric& metric) {
  if (p != 1 && p != 2) throw std::invalid_argument("wasserstein_exact: p must be 1 or 2");
  require_compatible(a, b);
  if (a.size() != b.size())
    throw std::invalid_argument("wasserstein_exact: ensembles must have equal member counts");
  if (a.size() > 2048)
    throw std::invalid_argument("wasserstein_exact: exact solver budget is m <= 2048");

  const Eigen::MatrixXd cost = transport_cost_matrix(a, b, p, metric);
  auto [assignment, total] = solve_assignment(cost);

  CouplingPlan plan;
  plan.assignment = std::move(assignment);
  const double mean = total / static_cast<double>(a.size());
  plan.cost = (p == 1) ? mean : std::sqrt(mean);
  return {plan.cost, plan};
}

double entropy_girsanov(const Ensemble& xi) {
  if (xi.size() == 0) return 0.0;
  if (xi.dim() != 1)
    throw std::invalid_argument("entropy_girsanov: members must be scalar control paths");
  double acc = 0.0;
  for (Eigen::Index m = 0; m < xi.size(); ++m) {
    const Eigen::MatrixXd& v = xi.members[static_cast<std::size_t>(m)];
    double integral = 0.0;
    for (Eigen::Index k = 0; k + 1 < xi.grid.size(); ++k)
      integral += v(k, 0) * v(k, 0) * xi.grid.delta(k);
    acc += integral;
  }
  return 0.5 * acc / static_cast<double>(xi.size());
}

namespace {

double mean_phi(const Eigen::VectorXd& abs_samples, double a) {
  const Eigen::ArrayXd t = abs_samples.array() / a;
  return (t.exp() - t - 1.0).mean();
}

}  // namespace

OrliczResult orlicz_norm(const Eigen::VectorXd& samples, double tol) {
  if (samples.size() == 0) throw std::invalid_argument("orlicz_norm: empty sample set");
  if (!(tol > 0.0)) throw std::invalid_argument("orlicz_norm: tol must be > 0");

  OrliczResult r;
  const Eigen::VectorXd abs = samples.cwiseAbs();
  r.norm_1 = abs.mean();
  const double peak = abs.maxCoeff();
  if (peak == 0.0) return r;  // all-zero samples: norm 0 by convention

  double lo = peak / 700.0;  // e^700 is the double overflow edge
  while (mean_phi(abs, lo) <= 1.0 && lo > 1e-300) lo *= 0.5;
  double hi = std::max(lo * 2.0, peak / 700.0 * 2.0);
  while (mean_phi(abs, hi) > 1.0) hi *= 2.0;

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double g = mean_phi(abs, mid);
    if (std::abs(g - 1.0) <= tol) break;
    (g > 1.0 ? lo : hi) = mid;
  }
  r.norm_phi = mid;
  r.residual = std::abs(mean_phi(abs, mid) - 1.0);
  return r;
}

QtciConstants qtci_constants(double K1, double K2, double K, double kappa, double T,
                             Eigen::Index n) {
  if (!(kappa > 0.0) || !(T > 0.0))
    throw std::invalid_argument("qtci_constants: kappa and T must be > 0");
  if (K1 < 0.0 || K2 < 0.0 || K < 0.0)
    throw std::invalid_argument("qtci_constants: Lipschitz constants must be >= 0");
  if (n < 1) throw std::invalid_argument("qtci_constants: n must be >= 1");
  QtciConstants c;
  c.K1 = K1;
  c.K2 = K2;
  c.K = K;
  c.kappa = kappa;
  c.T = T;
  c.n = n;
  c.c_1d = 4.0 * kappa * kappa * T * std::exp(4.0 * T * (K1 * K1 * T + 4.0 * K2 * K2));
  c.c_nd = 4.0 * kappa * kappa * T * std::exp(K * K * T * (T + 4.0)) / static_cast<double>(n);
  c.c_stopped = 4.0 * kappa * kappa;  // the default weight rule collapses the max to 1
  return c;
}

SlackReport qtci_verify(const Ensemble& P_ens, const Ensemble& Q_ens, double C, double H, int p,
                        const PathMetric& metric) {
  SlackReport rep;
  rep.p = p;
  rep.C = C;
  rep.H = H;
  rep.wasserstein = wasserstein_exact(P_ens, Q_ens, p, metric).first;
  rep.bound = std::sqrt(2.0 * C * H);

  // Same-law baseline: split P into halves and measure their distance; the
  // empirical W_p of two draws from one law sets the resolution floor.
  const Eigen::Index half = P_ens.size() / 2;
  if (half >= 1) {
    Ensemble even, odd;
    even.grid = odd.grid = P_ens.grid;
    for (Eigen::Index i = 0; i + 1 < P_ens.size() || i + 1 == P_ens.size(); i += 2) {
      if (i + 1 >= P_ens.size()) break;
      even.members.push_back(P_ens.members[static_cast<std::size_t>(i)]);
      odd.members.push_back(P_ens.members[static_cast<std::size_t>(i + 1)]);
    }
    rep.allowance = wasserstein_exact(even, odd, p, metric).first;
  }
  rep.slack = rep.bound - rep.wasserstein;
  rep.holds = rep.slack >= -rep.allowance;
  return rep;
}

double h_function(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("h_function: x must be > 0");
  return x * std::log(x) - x + std::exp(-1.0 / x);
}

}  // namespace conclab
