#pragma once

#include <Eigen/Dense>
#include <functional>

namespace conclab {

/// Lower median: element floor((m-1)/2) of the sorted samples.
double lower_median(const Eigen::VectorXd& samples);

double normal_cdf(double x);

/// CDF of |N(0,1)|: erf(x / sqrt(2)) for x >= 0.
double folded_normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov distance against a CDF.
double ks_distance(const Eigen::VectorXd& samples, const std::function<double(double)>& cdf);

/// Two-sample KS statistic.
double ks_two_sample(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Asymptotic Kolmogorov tail: p = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_pvalue(double statistic, double n_effective);

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  Eigen::Index points = 0;
};

Regression linear_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace conclab
