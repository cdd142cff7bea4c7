#include "conclab/skorokhod.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "conclab/errors.hpp"
#include "conclab/parallel.hpp"
#include "conclab/rng.hpp"

namespace conclab {

namespace {

// Minimal nondecreasing pusher keeping driver + ell >= 0.
void one_sided_pusher(const Eigen::VectorXd& driver, Eigen::VectorXd& ell) {
  ell.resize(driver.size());
  double running_min = 0.0;
  for (Eigen::Index k = 0; k < driver.size(); ++k) {
    running_min = std::min(running_min, driver[k]);
    ell[k] = -running_min;
  }
}

Path cumulative_variation(const TimeGrid& grid, const Eigen::MatrixXd& eta) {
  Path tv{grid, Eigen::VectorXd::Zero(grid.size())};
  for (Eigen::Index k = 1; k < grid.size(); ++k)
    tv.values[k] = tv.values[k - 1] + (eta.row(k) - eta.row(k - 1)).norm();
  return tv;
}

}  // namespace

SPSolution skorokhod_map_1d(const Path& psi) {
  if (psi.values.size() != psi.grid.size())
    throw std::invalid_argument("skorokhod_map_1d: path/grid size mismatch");
  if (psi.values[0] < 0.0)
    throw std::invalid_argument("skorokhod_map_1d: psi(0) must be >= 0");

  Eigen::VectorXd ell;
  one_sided_pusher(psi.values, ell);

  SPSolution sol;
  sol.phi = MultiPath{psi.grid, psi.values + ell};
  sol.eta = MultiPath{psi.grid, ell};
  sol.tv = Path{psi.grid, ell};  // eta nondecreasing, so |eta| = eta
  sol.face_local_times = {Path{psi.grid, ell}};
  sol.sweeps = 1;
  return sol;
}

SPSolution solve_sp(const PolyhedralDomain& domain, const MultiPath& psi, double tol,
                    int max_iter) {
  domain.validate();
  if (psi.dim() != domain.dim)
    throw std::invalid_argument("solve_sp: path dimension does not match domain");
  const Eigen::Index m = domain.face_count();
  const Eigen::Index rows = psi.grid.size();

  const ReflectionMatrices mats = build_matrices(domain);
  const double sr = spectral_radius(mats.Q);
  if (sr >= 1.0)
    throw CertificationError("solve_sp: sigma(Q) = " + std::to_string(sr) +
                             " >= 1, no Lipschitz certificate");

  // base_i(t) = <psi(t), eta_i> - c_i ; coupling A(i, j) = <d_j, eta_i>.
  Eigen::MatrixXd normals(m, domain.dim);
  Eigen::VectorXd offsets(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    normals.row(i) = domain.faces[static_cast<std::size_t>(i)].normal.transpose();
    offsets[i] = domain.faces[static_cast<std::size_t>(i)].offset;
  }
  Eigen::MatrixXd base = psi.values * normals.transpose();
  base.rowwise() -= offsets.transpose();
  if ((base.row(0).array() < -1e-9).any())
    throw std::invalid_argument("solve_sp: psi(0) lies outside the domain");

  const Eigen::MatrixXd A = normals * mats.D;  // A(i, j) = <eta_i, d_j>

  Eigen::MatrixXd ell = Eigen::MatrixXd::Zero(rows, m);
  Eigen::VectorXd slack(rows), updated(rows);

  SPSolution sol;
  bool converged = false;
  int sweep = 0;
  for (; sweep < max_iter && !converged; ++sweep) {
    double delta = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      slack = base.col(i);
      for (Eigen::Index j = 0; j < m; ++j)
        if (j != i && A(i, j) != 0.0) slack += A(i, j) * ell.col(j);
      one_sided_pusher(slack, updated);
      delta = std::max(delta, (updated - ell.col(i)).cwiseAbs().maxCoeff());
      ell.col(i) = updated;
    }
    sol.residual_history.push_back(delta);
    converged = delta < tol;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "solve_sp: no convergence after " << max_iter
        << " sweeps, last residual = " << sol.residual_history.back();
    throw ConvergenceError(msg.str(), sol.residual_history.back());
  }

  sol.sweeps = sweep;
  sol.eta = MultiPath{psi.grid, ell * mats.D.transpose()};
  sol.phi = MultiPath{psi.grid, psi.values + sol.eta.values};
  sol.tv = cumulative_variation(psi.grid, sol.eta.values);
  sol.face_local_times.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i)
    sol.face_local_times.push_back(Path{psi.grid, ell.col(i)});
  return sol;
}

double local_time_occupation(const Path& path, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("local_time_occupation: eps must be > 0");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double occupied = 0.0;
  for (Eigen::Index k = 0; k + 1 < path.grid.size(); ++k)
    if (path.values[k] * inv_sqrt2 <= eps) occupied += path.grid.delta(k);
  return occupied / (2.0 * eps);
}

Path local_time_occupation_path(const Path& path, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("local_time_occupation: eps must be > 0");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Path out{path.grid, Eigen::VectorXd::Zero(path.grid.size())};
  for (Eigen::Index k = 0; k + 1 < path.grid.size(); ++k) {
    const double hit = (path.values[k] * inv_sqrt2 <= eps) ? path.grid.delta(k) : 0.0;
    out.values[k + 1] = out.values[k] + hit;
  }
  out.values /= 2.0 * eps;
  return out;
}

std::pair<Path, Path> tanaka_reconstruct(const Path& bm) {
  if (std::abs(bm.values[0]) > 0.0)
    throw std::invalid_argument("tanaka_reconstruct: bm(0) must be 0");
  Path integral{bm.grid, Eigen::VectorXd::Zero(bm.grid.size())};
  for (Eigen::Index k = 0; k + 1 < bm.grid.size(); ++k) {
    const double sign = bm.values[k] > 0.0 ? 1.0 : -1.0;  // sgn(0) = -1
    integral.values[k + 1] = integral.values[k] + sign * (bm.values[k + 1] - bm.values[k]);
  }
  SPSolution sp = skorokhod_map_1d(integral);
  return {integral, sp.face_local_times[0]};
}

Eigen::MatrixXd RankLocalTimes::occupation_at_horizon() const {
  Eigen::MatrixXd out(occupation.size(), occupation.dim());
  for (Eigen::Index i = 0; i < occupation.size(); ++i)
    out.row(i) = occupation.members[static_cast<std::size_t>(i)].bottomRows(1);
  return out;
}

Eigen::MatrixXd RankLocalTimes::sp_at_horizon() const {
  Eigen::MatrixXd out(sp.size(), sp.dim());
  for (Eigen::Index i = 0; i < sp.size(); ++i)
    out.row(i) = sp.members[static_cast<std::size_t>(i)].bottomRows(1);
  return out;
}

RankLocalTimes rank_local_times(const RankEnsemble& re, const PolyhedralDomain& domain,
                                double eps, double sp_tol) {
  const Eigen::Index n = re.raw.dim();
  const Eigen::Index m_paths = re.raw.size();
  const TimeGrid& grid = re.raw.grid;
  if (domain.dim != n)
    throw std::invalid_argument("rank_local_times: domain dimension mismatch");

  RankLocalTimes out;
  out.eps = eps;
  out.occupation.grid = grid;
  out.occupation.seeds = re.raw.seeds;
  out.occupation.members.resize(static_cast<std::size_t>(m_paths));
  out.sp.grid = grid;
  out.sp.seeds = re.raw.seeds;
  out.sp.members.resize(static_cast<std::size_t>(m_paths));

  if (n == 1) {
    for (auto& mem : out.occupation.members) mem.resize(grid.size(), 0);
    for (auto& mem : out.sp.members) mem.resize(grid.size(), 0);
    return out;
  }

  const CounterRng aux(re.raw.seeds.master_seed, RngStream::Auxiliary);
  const Eigen::MatrixXd S = spacing_matrix(n);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> spacing_qr(S);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  parallel_for(m_paths, [&](std::int64_t mi) {
    const auto idx = static_cast<std::size_t>(mi);
    const std::uint64_t global = re.raw.seeds.member_streams[idx];

    // Occupation estimator on every gap.
    const Eigen::MatrixXd& gaps = re.gaps.members[idx];
    Eigen::MatrixXd& occ = out.occupation.members[idx];
    occ.resize(grid.size(), n - 1);
    for (Eigen::Index j = 0; j + 1 < n; ++j)
      occ.col(j) = local_time_occupation_path(Path{grid, gaps.col(j)}, eps).values;

    // SP estimator: driver psi_i = X_(i)(0) - xbar(0) + beta_i - betabar + beta_raw / sqrt(n),
    // where beta_raw is an auxiliary Brownian motion with drift -1 started at 1.
    const Eigen::MatrixXd& betas = re.betas.members[idx];
    const Eigen::MatrixXd& ordered = re.ordered.members[idx];
    Eigen::VectorXd beta_raw(grid.size());
    beta_raw[0] = 1.0;
    for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
      const double h = grid.delta(k);
      beta_raw[k + 1] =
          beta_raw[k] - h + std::sqrt(h) * aux.normal(global, static_cast<std::uint64_t>(k), 0);
    }
    const Eigen::VectorXd beta_mean = betas.rowwise().mean();
    const double x0_mean = ordered.row(0).mean();

    MultiPath psi{grid, Eigen::MatrixXd(grid.size(), n)};
    for (Eigen::Index i = 0; i < n; ++i)
      psi.values.col(i) = betas.col(i) - beta_mean + inv_sqrt_n * beta_raw +
                          Eigen::VectorXd::Constant(grid.size(), ordered(0, i) - x0_mean);

    SPSolution sol = solve_sp(domain, psi, sp_tol);

    // Strip the hyperplane face's contribution, then invert the spacing map
    // by least squares for the gap local times.
    Eigen::MatrixXd eta_centered = sol.eta.values;
    if (domain.face_count() == n) {
      const Eigen::VectorXd& ell_last = sol.face_local_times.back().values;
      eta_centered -= inv_sqrt_n * ell_last * Eigen::RowVectorXd::Ones(n);
    }
    out.sp.members[idx] = spacing_qr.solve(eta_centered.transpose()).transpose();
  });

  return out;
}

}  // namespace conclab
