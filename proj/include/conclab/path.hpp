#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace conclab {

/// Uniform time grid 0 = t_0 < t_1 < ... < t_M = T. All interior steps
/// equal dt; the final step may be shorter so that t_M lands exactly on T.
struct TimeGrid {
  double horizon = 0.0;    // T
  double step = 0.0;       // nominal dt
  Eigen::VectorXd points;  // strictly increasing, size M+1 >= 2

  Eigen::Index size() const { return points.size(); }
  Eigen::Index steps() const { return points.size() - 1; }
  double delta(Eigen::Index k) const { return points[k + 1] - points[k]; }
};

TimeGrid make_grid(double T, double dt);

bool grids_equal(const TimeGrid& a, const TimeGrid& b, double tol = 1e-12);

/// Scalar path sampled on a grid.
struct Path {
  TimeGrid grid;
  Eigen::VectorXd values;  // one entry per grid point
};

/// n-component path on a shared grid; values(k, i) = component i at t_k.
struct MultiPath {
  TimeGrid grid;
  Eigen::MatrixXd values;  // (M+1) x n

  Eigen::Index dim() const { return values.cols(); }
  Path component(Eigen::Index i) const { return Path{grid, values.col(i)}; }
};

MultiPath as_multipath(const Path& p);

/// Record of how an ensemble's noise was keyed, enough to regenerate it.
struct SeedLineage {
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> member_streams;  // global member index per member
};

/// A finite collection of same-shape MultiPaths: the empirical stand-in
/// for a path-space law.
struct Ensemble {
  TimeGrid grid;
  std::vector<Eigen::MatrixXd> members;  // each (M+1) x n
  SeedLineage seeds;

  Eigen::Index size() const { return static_cast<Eigen::Index>(members.size()); }
  Eigen::Index dim() const { return members.empty() ? 0 : members.front().cols(); }
  MultiPath member(Eigen::Index i) const { return MultiPath{grid, members[static_cast<std::size_t>(i)]}; }
};

/// Throws std::invalid_argument unless both ensembles share grid and dimension.
void require_compatible(const Ensemble& a, const Ensemble& b);

}  // namespace conclab
