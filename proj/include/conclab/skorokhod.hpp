#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "conclab/geometry.hpp"
#include "conclab/path.hpp"
#include "conclab/rank.hpp"

namespace conclab {

/// Solution of a Skorokhod problem on the grid: phi = psi + eta with phi
/// inside the domain, eta of bounded variation pushing along the face
/// directions, and one nondecreasing local-time path per face.
struct SPSolution {
  MultiPath phi;
  MultiPath eta;
  Path tv;  // running total variation |eta|
  std::vector<Path> face_local_times;
  int sweeps = 0;
  std::vector<double> residual_history;
};

/// One-dimensional map on the half line: ell(t) = -min(0, inf_{s<=t} psi(s)),
/// phi = psi + ell. Requires psi(0) >= 0.
SPSolution skorokhod_map_1d(const Path& psi);

/// Polyhedral solver: Gauss-Seidel fixed point over faces, each sweep
/// applying the 1-D map to a face's slack given the other faces' pushing.
/// Requires psi(0) inside the domain and sigma(Q) < 1.
SPSolution solve_sp(const PolyhedralDomain& domain, const MultiPath& psi, double tol = 1e-10,
                    int max_iter = 10000);

/// Occupation estimate of the boundary local time at horizon T:
/// (1 / 2 eps) * sum over steps of dt * 1{ value(t_k) / sqrt(2) <= eps }.
/// The one-sided indicator matches a nonnegative gap process.
double local_time_occupation(const Path& path, double eps);

/// Running occupation estimate as a path (left-point quadrature).
Path local_time_occupation_path(const Path& path, double eps);

/// Discrete Tanaka split of |bm|: the sign-weighted Ito sum (sgn(0) = -1)
/// and the local time obtained by the 1-D map applied to that sum.
std::pair<Path, Path> tanaka_reconstruct(const Path& bm);

/// Gap local times L_{j,j+1} for a rank ensemble, by both estimators.
struct RankLocalTimes {
  Ensemble occupation;  // members: (M+1) x (n-1) running occupation estimates
  Ensemble sp;          // members: (M+1) x (n-1) recovered from the SP pushing term
  double eps = 0.0;

  /// Terminal values as an m x (n-1) matrix.
  Eigen::MatrixXd occupation_at_horizon() const;
  Eigen::MatrixXd sp_at_horizon() const;
};

enum class LocalTimeMethod { Occupation, SkorokhodMap };

/// Both estimators over the whole ensemble. The SP route drives the
/// chamber-domain Skorokhod problem with the ordered system recentred by
/// an auxiliary reflected Brownian motion (drift -1 from 1), then recovers
/// L from the pushing term by least squares against the spacing matrix.
RankLocalTimes rank_local_times(const RankEnsemble& re, const PolyhedralDomain& domain,
                                double eps = 0.01, double sp_tol = 1e-9);

}  // namespace conclab
