#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace conclab {

/// One boundary face of a polyhedral domain {x : <x, normal> >= offset},
/// with a constant reflection direction satisfying <direction, normal> = 1.
struct Face {
  Eigen::VectorXd normal;
  double offset = 0.0;
  Eigen::VectorXd direction;
};

struct PolyhedralDomain {
  Eigen::Index dim = 0;
  std::vector<Face> faces;

  Eigen::Index face_count() const { return static_cast<Eigen::Index>(faces.size()); }
  void validate() const;
  /// Signed distance-like slack <x, normal_i> - offset_i of face i at x.
  double slack(Eigen::Index i, const Eigen::VectorXd& x) const;
};

/// The wedge {x_1 >= x_2 >= ... >= x_n} intersected with {sum x_i >= 0},
/// normal reflection on every face. For n = 1 this degenerates to the
/// half line {x >= 0}.
PolyhedralDomain chamber_domain(Eigen::Index n);

/// The same wedge without the hyperplane face (n-1 faces in R^n).
PolyhedralDomain ordered_cone(Eigen::Index n);

/// D (direction columns), Q (reflection coupling matrix with entries
/// |<d_i, eta_j>| off the diagonal and |1 - <d_i, eta_i>| on it), and the
/// spacing matrix S for the ambient dimension.
struct ReflectionMatrices {
  Eigen::MatrixXd D;  // dim x faces
  Eigen::MatrixXd Q;  // faces x faces, nonnegative
  Eigen::MatrixXd S;  // dim x (dim-1)
};

ReflectionMatrices build_matrices(const PolyhedralDomain& domain);

/// S = (1/sqrt(2)) [e1-e2 | e2-e3 | ... | e_{n-1}-e_n], the linear map from
/// gap local times to the coordinate-wise pushing term.
Eigen::MatrixXd spacing_matrix(Eigen::Index n);

/// Largest eigenvalue modulus of a square nonnegative matrix. Power
/// iteration on Q + I (so bipartite-type +/- spectra still converge) with
/// a dense eigensolve fallback.
double spectral_radius(const Eigen::MatrixXd& Q, double tol = 1e-12);

/// Certificate vector u_k = (k/n)(1 - k/n) for k < n, u_n = 1/n^2, together
/// with the slack delta = 1/n^2. Asserts Qu < u for the chamber Q.
std::pair<Eigen::VectorXd, double> build_u_vector(Eigen::Index n);

struct LipschitzCertificate {
  Eigen::VectorXd u;
  double delta = 0.0;
  double diam_B = 0.0;
  double K = 0.0;  // 1 + diam_B / delta
  double spectral_radius = 0.0;
  bool diam_exact = true;  // sign enumeration vs analytic bound
};

/// Certificate for the chamber family (u built internally) or for any
/// domain with sigma(Q) < 1 and a supplied u with Qu < u.
LipschitzCertificate certificate(const PolyhedralDomain& domain);
LipschitzCertificate certificate(const PolyhedralDomain& domain, const Eigen::VectorXd& u);

/// Three views of the smallest singular value squared of S: the displayed
/// lower-bound expression evaluated at the equal-entries configuration
/// (1/(n-1)), the numerical minimum, and the closed form 1 - cos(pi/n).
struct SpacingReport {
  double equal_entries_bound = 0.0;
  double min_singular_sq = 0.0;
  double closed_form = 0.0;
  bool disagreement = false;
};

SpacingReport spacing_min_singular(Eigen::Index n);

}  // namespace conclab
