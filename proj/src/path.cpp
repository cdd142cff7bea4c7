#include "conclab/path.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace conclab {

TimeGrid make_grid(double T, double dt) {
  if (!(T > 0.0)) throw std::invalid_argument("make_grid: horizon T must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("make_grid: step dt must be > 0");
  if (dt > T) throw std::invalid_argument("make_grid: dt must not exceed T");

  // Number of full steps of size dt that fit strictly inside [0, T).
  auto full = static_cast<Eigen::Index>(std::floor(T / dt + 1e-9));
  const double tol = 1e-12 * std::max(1.0, T);
  const bool exact = full * dt >= T - tol;
  if (!exact) ++full;  // truncated final step up to T

  TimeGrid g;
  g.horizon = T;
  g.step = dt;
  g.points.resize(full + 1);
  for (Eigen::Index k = 0; k < full; ++k) g.points[k] = static_cast<double>(k) * dt;
  g.points[full] = T;
  return g;
}

bool grids_equal(const TimeGrid& a, const TimeGrid& b, double tol) {
  if (a.size() != b.size()) return false;
  return (a.points - b.points).cwiseAbs().maxCoeff() <= tol;
}

MultiPath as_multipath(const Path& p) {
  MultiPath m;
  m.grid = p.grid;
  m.values = p.values;
  return m;
}

void require_compatible(const Ensemble& a, const Ensemble& b) {
  if (!grids_equal(a.grid, b.grid))
    throw std::invalid_argument("ensembles live on different grids");
  if (a.dim() != b.dim())
    throw std::invalid_argument("ensembles have different dimensions: " +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

}  // namespace conclab
