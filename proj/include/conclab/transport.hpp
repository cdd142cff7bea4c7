#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "conclab/metrics.hpp"
#include "conclab/path.hpp"

namespace conclab {

/// Optimal pairing between two equal-size ensembles.
struct CouplingPlan {
  std::vector<Eigen::Index> assignment;  // member i of a <-> assignment[i] of b
  double cost = 0.0;                     // (mean of paired metric^p)^(1/p)
};

/// Exact minimum-cost assignment of a dense cost matrix (shortest
/// augmenting paths with potentials, O(m^3)). Returns the row-to-column
/// assignment and the total cost.
std::pair<std::vector<Eigen::Index>, double> solve_assignment(const Eigen::MatrixXd& cost);

/// Empirical W_p between equal-weight ensembles as an assignment problem,
/// solved exactly. Budgeted at m <= 2048 members.
std::pair<double, CouplingPlan> wasserstein_exact(const Ensemble& a, const Ensemble& b, int p,
                                                  const PathMetric& metric);

/// Pairwise metric^p cost matrix (exposed for audit dumps).
Eigen::MatrixXd transport_cost_matrix(const Ensemble& a, const Ensemble& b, int p,
                                      const PathMetric& metric);

/// Relative entropy from Girsanov control paths sampled under Q:
/// H = (1/2) mean over members of the left-point quadrature of xi^2.
double entropy_girsanov(const Ensemble& xi);

struct OrliczResult {
  double norm_phi = 0.0;  // ||L||_Phi
  double norm_1 = 0.0;    // mean |L|
  double residual = 0.0;  // |E Phi(|L|/a) - 1| at the returned a
};

/// Birnbaum-Orlicz norm for Phi(t) = e^t - t - 1 by bisection on the
/// scaling a; bracketing starts at max|L|/700 to keep e^t finite.
OrliczResult orlicz_norm(const Eigen::VectorXd& samples, double tol = 1e-10);

struct QtciConstants {
  double c_1d = 0.0;       // 4 kappa^2 T exp(4T(K1^2 T + 4 K2^2))
  double c_nd = 0.0;       // 4 n^-1 kappa^2 T exp(K^2 T (T + 4))
  double c_stopped = 0.0;  // 4 kappa^2 under the default weight rule
  double K1 = 0.0, K2 = 0.0, K = 0.0, kappa = 0.0, T = 0.0;
  Eigen::Index n = 0;
};

QtciConstants qtci_constants(double K1, double K2, double K, double kappa, double T,
                             Eigen::Index n);

struct SlackReport {
  double wasserstein = 0.0;
  double bound = 0.0;      // sqrt(2 C H)
  double slack = 0.0;      // bound - wasserstein
  double allowance = 0.0;  // same-law split-sample baseline
  bool holds = false;      // slack >= -allowance
  int p = 2;
  double C = 0.0, H = 0.0;
};

/// Empirical transportation-cost check: W_p(P, Q) against sqrt(2 C H).
/// The finite-sample allowance is the split-half same-law baseline of P.
SlackReport qtci_verify(const Ensemble& P_ens, const Ensemble& Q_ens, double C, double H, int p,
                        const PathMetric& metric);

/// h(x) = x log x - x + e^{-1/x}; negative throughout (0, 1/log 2).
double h_function(double x);

}  // namespace conclab
