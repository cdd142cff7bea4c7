#include "conclab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace conclab {

double lower_median(const Eigen::VectorXd& samples) {
  if (samples.size() == 0) throw std::invalid_argument("lower_median: empty samples");
  std::vector<double> v(samples.data(), samples.data() + samples.size());
  const auto mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double folded_normal_cdf(double x) { return x <= 0.0 ? 0.0 : std::erf(x / std::sqrt(2.0)); }

double ks_distance(const Eigen::VectorXd& samples, const std::function<double(double)>& cdf) {
  if (samples.size() == 0) throw std::invalid_argument("ks_distance: empty samples");
  std::vector<double> v(samples.data(), samples.data() + samples.size());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

double ks_two_sample(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("ks_two_sample: empty samples");
  std::vector<double> va(a.data(), a.data() + a.size());
  std::vector<double> vb(b.data(), b.data() + b.size());
  std::sort(va.begin(), va.end());
  std::sort(vb.begin(), vb.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < va.size() && j < vb.size()) {
    const double x = std::min(va[i], vb[j]);
    while (i < va.size() && va[i] <= x) ++i;
    while (j < vb.size() && vb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(va.size()) -
                             static_cast<double>(j) / static_cast<double>(vb.size())));
  }
  return d;
}

double kolmogorov_pvalue(double statistic, double n_effective) {
  const double lambda = std::sqrt(n_effective) * statistic;
  if (lambda < 1e-8) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

Regression linear_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need at least two matched points");
  Regression r;
  r.points = x.size();
  const double xm = x.mean(), ym = y.mean();
  const Eigen::VectorXd dx = x.array() - xm;
  const Eigen::VectorXd dy = y.array() - ym;
  const double sxx = dx.squaredNorm();
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate x values");
  r.slope = dx.dot(dy) / sxx;
  r.intercept = ym - r.slope * xm;
  const double ss_res = (dy - r.slope * dx).squaredNorm();
  const double ss_tot = dy.squaredNorm();
  r.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return r;
}

}  // namespace conclab
