#include "lfpp/stats.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfpp/common.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

LinearFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  if (n != y.size() || n < 2) throw ValidationError("fit needs at least two paired points");
  if ((x.array() == x[0]).all()) throw ValidationError("degenerate regression: all x values identical");
  Eigen::MatrixXd A(n, 2);
  A.col(0).setOnes();
  A.col(1) = x;
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
  LinearFit f;
  f.intercept = beta[0];
  f.slope = beta[1];
  f.residuals = y - A * beta;
  const double sse = f.residuals.squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();
  f.r_squared = sst > 0.0 ? 1.0 - sse / sst : 1.0;
  const double sxx = (x.array() - x.mean()).square().sum();
  f.stderr_slope = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return f;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw ValidationError("mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) throw ValidationError("variance needs two values");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ValidationError("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

Estimate covariance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw ValidationError("covariance needs paired samples");
  const double mx = mean(x), my = mean(y);
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = (x[i] - mx) * (y[i] - my);
  const double n = static_cast<double>(x.size());
  return {mean(p) * n / (n - 1), std::sqrt(variance(p) / n)};
}

Estimate mean_estimate(const std::vector<double>& v) {
  return {mean(v), std::sqrt(variance(v) / v.size())};
}

Interval wilson_interval(std::int64_t hits, std::int64_t n, double z) {
  if (n <= 0) throw ValidationError("wilson interval needs n > 0");
  const double p = static_cast<double>(hits) / n, z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

Interval bootstrap_median_ci(const std::vector<double>& v, std::uint64_t seed, int resamples, double level) {
  if (v.empty()) throw ValidationError("bootstrap of empty sample");
  auto rng = make_stream(seed, StreamPurpose::bootstrap, 0);
  std::vector<double> meds(resamples), buf(v.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto& x : buf) x = v[rng() % v.size()];
    meds[b] = median(buf);
  }
  const double a = 0.5 * (1.0 - level);
  return {quantile(meds, a), quantile(meds, 1.0 - a)};
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // series converges slowly here and the value is 1 to double precision
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double dmax = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    dmax = std::max(dmax, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {dmax, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * dmax)};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double c = covariance(x, y).value;
  const double vx = variance(x), vy = variance(y);
  if (vx == 0.0 || vy == 0.0) return 0.0;
  return c / std::sqrt(vx * vy);
}

}  // namespace lfpp
