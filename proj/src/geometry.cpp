#include "conclab/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "conclab/errors.hpp"

namespace conclab {

void PolyhedralDomain::validate() const {
  if (dim < 1) throw std::invalid_argument("PolyhedralDomain: dim must be >= 1");
  if (faces.empty()) throw std::invalid_argument("PolyhedralDomain: no faces");
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& f = faces[i];
    if (f.normal.size() != dim || f.direction.size() != dim)
      throw std::invalid_argument("PolyhedralDomain: face vector size mismatch");
    if (std::abs(f.normal.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("PolyhedralDomain: face " + std::to_string(i) +
                                  " normal is not unit");
    if (std::abs(f.direction.dot(f.normal) - 1.0) > 1e-12)
      throw std::invalid_argument("PolyhedralDomain: face " + std::to_string(i) +
                                  " violates <d, eta> = 1");
  }
  if (face_count() == dim) {
    Eigen::MatrixXd D(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) D.col(i) = faces[static_cast<std::size_t>(i)].direction;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
    if (lu.rank() < dim)
      throw CertificationError("PolyhedralDomain: direction vectors are linearly dependent");
  }
}

double PolyhedralDomain::slack(Eigen::Index i, const Eigen::VectorXd& x) const {
  const Face& f = faces[static_cast<std::size_t>(i)];
  return f.normal.dot(x) - f.offset;
}

PolyhedralDomain chamber_domain(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("chamber_domain: n must be >= 1");
  PolyhedralDomain g;
  g.dim = n;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    Face f;
    f.normal = Eigen::VectorXd::Zero(n);
    f.normal[i] = inv_sqrt2;
    f.normal[i + 1] = -inv_sqrt2;
    f.offset = 0.0;
    f.direction = f.normal;
    g.faces.push_back(std::move(f));
  }
  Face last;
  last.normal = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  last.offset = 0.0;
  last.direction = last.normal;
  g.faces.push_back(std::move(last));
  return g;
}

PolyhedralDomain ordered_cone(Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("ordered_cone: n must be >= 2");
  PolyhedralDomain g = chamber_domain(n);
  g.faces.pop_back();
  return g;
}

ReflectionMatrices build_matrices(const PolyhedralDomain& domain) {
  domain.validate();
  const Eigen::Index m = domain.face_count();
  ReflectionMatrices r;
  r.D.resize(domain.dim, m);
  for (Eigen::Index i = 0; i < m; ++i) r.D.col(i) = domain.faces[static_cast<std::size_t>(i)].direction;
  r.Q.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double ip = domain.faces[static_cast<std::size_t>(i)].direction.dot(
          domain.faces[static_cast<std::size_t>(j)].normal);
      r.Q(i, j) = (i == j) ? std::abs(1.0 - ip) : std::abs(ip);
    }
  }
  r.S = spacing_matrix(domain.dim);
  return r;
}

Eigen::MatrixXd spacing_matrix(Eigen::Index n) {
  if (n < 2) return Eigen::MatrixXd::Zero(n, 0);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n - 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    S(j, j) = inv_sqrt2;
    S(j + 1, j) = -inv_sqrt2;
  }
  return S;
}

double spectral_radius(const Eigen::MatrixXd& Q, double tol) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
  if ((Q.array() < 0.0).any())
    throw std::invalid_argument("spectral_radius: matrix must be nonnegative");
  const Eigen::Index n = Q.rows();
  if (n == 0) return 0.0;
  if (Q.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  // Power iteration on A = Q + I; for nonnegative Q the Perron root of A is
  // 1 + sigma(Q) and is the unique eigenvalue of largest modulus direction-wise.
  const Eigen::MatrixXd A = Q + Eigen::MatrixXd::Identity(n, n);
  const bool symmetric = (Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-14;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double theta = 0.0;
  std::vector<double> history;
  const int max_iter = 200000;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = A * x;
    theta = x.dot(y);  // Rayleigh quotient, ||x|| = 1
    const double residual = (y - theta * x).norm();
    if (it % 100 == 0) history.push_back(theta - 1.0);
    if (symmetric) {
      // |theta - lambda| <= residual for symmetric A.
      if (residual <= std::max(tol, 1e-15) * 0.5) return theta - 1.0;
    } else {
      if (!history.empty() && it > 2 && residual <= std::max(tol, 1e-15) * 0.5)
        return theta - 1.0;
    }
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
  }

  // Dense fallback (QR iteration with deflation inside Eigen).
  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    if (es.info() == Eigen::Success) return es.eigenvalues().cwiseAbs().maxCoeff();
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(Q);
    if (es.info() == Eigen::Success) return es.eigenvalues().cwiseAbs().maxCoeff();
  }

  std::ostringstream msg;
  msg << "spectral_radius: no convergence after " << max_iter << " iterations; estimates:";
  for (std::size_t i = history.size() > 8 ? history.size() - 8 : 0; i < history.size(); ++i)
    msg << ' ' << history[i];
  throw ConvergenceError(msg.str(), history.empty() ? 0.0 : history.back());
}

std::pair<Eigen::VectorXd, double> build_u_vector(Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("build_u_vector: n must be >= 2");
  Eigen::VectorXd u(n);
  const double nn = static_cast<double>(n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double x = static_cast<double>(k) / nn;
    u[k - 1] = x * (1.0 - x);
  }
  const double delta = 1.0 / (nn * nn);
  // v(1) = 0 would make the last entry degenerate; any positive value with
  // slack >= delta works since row n of Q vanishes. Take u_n = 1/n^2.
  u[n - 1] = delta;

  const Eigen::MatrixXd Q = build_matrices(chamber_domain(n)).Q;
  const Eigen::VectorXd qu = Q * u;
  if (((u - qu).array() <= 0.0).any())
    throw CertificationError("build_u_vector: Qu < u failed");
  if ((u - qu).minCoeff() < delta - 1e-12)
    throw CertificationError("build_u_vector: slack fell below delta = n^-2");
  return {u, delta};
}

namespace {

// diam(B) = 2 max over sign patterns of || sum_i s_i u_i d(i) ||, exact by
// Gray-code enumeration for small face counts.
double diameter_exact(const Eigen::MatrixXd& D, const Eigen::VectorXd& u) {
  const Eigen::Index m = D.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(D.rows());
  for (Eigen::Index i = 0; i < m; ++i) w += u[i] * D.col(i);  // all signs +1
  double best = w.squaredNorm();
  std::uint64_t gray = 0;
  const std::uint64_t total = (1ull << m);
  for (std::uint64_t k = 1; k < total; ++k) {
    const std::uint64_t g = k ^ (k >> 1);
    const std::uint64_t flipped = g ^ gray;
    gray = g;
    int bit = 0;
    while (!((flipped >> bit) & 1ull)) ++bit;
    const bool now_negative = (g >> bit) & 1ull;
    const double scale = now_negative ? -2.0 : 2.0;
    w += scale * u[bit] * D.col(bit);
    best = std::max(best, w.squaredNorm());
  }
  return 2.0 * std::sqrt(best);
}

}  // namespace

LipschitzCertificate certificate(const PolyhedralDomain& domain, const Eigen::VectorXd& u) {
  const ReflectionMatrices mats = build_matrices(domain);
  const Eigen::Index m = domain.face_count();
  if (u.size() != m) throw std::invalid_argument("certificate: u size must match face count");
  if ((u.array() <= 0.0).any()) throw std::invalid_argument("certificate: u must be positive");

  LipschitzCertificate cert;
  cert.spectral_radius = spectral_radius(mats.Q);
  if (cert.spectral_radius >= 1.0)
    throw CertificationError("certificate: sigma(Q) = " + std::to_string(cert.spectral_radius) +
                             " >= 1, Skorokhod map not certified Lipschitz");

  const Eigen::VectorXd slack = u - mats.Q * u;
  if ((slack.array() <= 0.0).any())
    throw CertificationError("certificate: supplied u does not satisfy Qu < u");

  cert.u = u;
  cert.delta = slack.minCoeff();
  if (m <= 20) {
    cert.diam_B = diameter_exact(mats.D, u);
    cert.diam_exact = true;
  } else {
    cert.diam_B = 2.0 * std::sqrt(3.0 * u.squaredNorm());
    cert.diam_exact = false;
  }
  cert.K = 1.0 + cert.diam_B / cert.delta;
  return cert;
}

LipschitzCertificate certificate(const PolyhedralDomain& domain) {
  auto [u, delta] = build_u_vector(domain.dim);
  if (domain.face_count() != domain.dim)
    throw std::invalid_argument("certificate: supply u explicitly for non-chamber domains");
  LipschitzCertificate cert = certificate(domain, u);
  cert.delta = delta;  // the canonical n^-2, equal to the audited min slack
  cert.K = 1.0 + cert.diam_B / cert.delta;
  return cert;
}

SpacingReport spacing_min_singular(Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("spacing_min_singular: n must be >= 2");
  SpacingReport r;
  r.equal_entries_bound = 1.0 / static_cast<double>(n - 1);
  const Eigen::MatrixXd S = spacing_matrix(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S.transpose() * S);
  r.min_singular_sq = es.eigenvalues().minCoeff();
  r.closed_form = 1.0 - std::cos(M_PI / static_cast<double>(n));
  r.disagreement = std::abs(r.equal_entries_bound - r.min_singular_sq) > 1e-9;
  return r;
}

}  // namespace conclab
