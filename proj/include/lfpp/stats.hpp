#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace lfpp {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double r_squared = 0.0;
  Eigen::VectorXd residuals;
};

// Ordinary least squares y = intercept + slope * x (QR solve). Throws on degenerate x.
LinearFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased
double quantile(std::vector<double> v, double q);  // linear interpolation, type 7
double median(std::vector<double> v);

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Sample covariance and the standard error from the spread of centred products.
Estimate covariance(const std::vector<double>& x, const std::vector<double>& y);
Estimate mean_estimate(const std::vector<double>& v);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval wilson_interval(std::int64_t hits, std::int64_t n, double z = 1.959963984540054);

// Percentile bootstrap of the median, resampling driven by a counter stream.
Interval bootstrap_median_ci(const std::vector<double>& v, std::uint64_t seed, int resamples = 1000,
                             double level = 0.95);

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lfpp
