#include "lfpp/gwtools.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <numbers>

#include "lfpp/common.hpp"
#include "lfpp/pipeline.hpp"
#include "lfpp/rng.hpp"

namespace lfpp {

namespace {

double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2); }

// Step variances Var(X_{t_{k+1}} - X_{t_k}).
std::vector<double> step_variances(const DriftedProcessSpec& spec) {
  const int n = spec.steps();
  std::vector<double> v(n);
  if (spec.kind == CovarianceKind::brownian) {
    std::fill(v.begin(), v.end(), spec.dt);
    return v;
  }
  double prev = spec.variance(0.0);
  for (int k = 0; k < n; ++k) {
    const double next = spec.variance((k + 1) * spec.dt);
    v[k] = next - prev;
    prev = next;
  }
  return v;
}

std::vector<PathSummary> simulate(const DriftedProcessSpec& spec, int n_samples, std::uint64_t seed) {
  const auto var = step_variances(spec);
  std::vector<double> sd(var.size());
  for (std::size_t k = 0; k < var.size(); ++k) sd[k] = std::sqrt(var[k]);
  const double a = spec.drift_a, dt = spec.dt;
  return parallel_map<PathSummary>(n_samples, [&](std::size_t i) {
    auto noise = make_stream(seed, StreamPurpose::gw_paths, static_cast<std::uint32_t>(i), 0);
    auto bridge = make_stream(seed, StreamPurpose::gw_paths, static_cast<std::uint32_t>(i), 1);
    boost::random::normal_distribution<double> normal;
    double g = 0.0, sup = 0.0, integral = 0.0, eg = 1.0;
    for (std::size_t k = 0; k < sd.size(); ++k) {
      const double g1 = g - a * dt + sd[k] * normal(noise);
      const double e1 = g1 > -40.0 ? std::exp(g1) : 0.0;  // below e^-40 nothing registers against dt
      integral += 0.5 * (eg + e1) * dt;
      const double top = std::max(g, g1);
      // Maximum of the Brownian bridge between the two grid values; only drawn when it can matter.
      if (spec.bridge_correction && top + 8.0 * sd[k] > sup) {
        const double u = 1.0 - bridge.uniform01();
        const double diff = g1 - g;
        sup = std::max(sup, 0.5 * (g + g1 + std::sqrt(diff * diff - 2.0 * var[k] * std::log(u))));
      } else {
        sup = std::max(sup, top);
      }
      g = g1;
      eg = e1;
    }
    return PathSummary{sup, integral, g};
  });
}

struct WeightedFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
};

// Fit of log p against x with weights n p / (1 - p), the inverse delta-method variance of log p-hat.
WeightedFit weighted_log_fit(const std::vector<double>& x, const std::vector<double>& p, std::int64_t n) {
  const auto m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double w = std::sqrt(n * p[i] / std::max(1.0 - p[i], 1.0 / n));
    A(i, 0) = w;
    A(i, 1) = w * x[i];
    b[i] = w * std::log(p[i]);
  }
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(b);
  const Eigen::Matrix2d cov = (A.transpose() * A).inverse();
  return {beta[1], std::sqrt(cov(1, 1))};
}

TailReport tail_from(const std::vector<double>& values, const std::vector<double>& thresholds, bool log_x) {
  if (thresholds.empty()) throw ValidationError("no thresholds given");
  for (std::size_t k = 0; k < thresholds.size(); ++k)
    if (!(thresholds[k] > 0.0) || (k > 0 && !(thresholds[k] > thresholds[k - 1])))
      throw ValidationError("thresholds must be positive and increasing");
  TailReport rep;
  rep.thresholds = thresholds;
  rep.n = static_cast<std::int64_t>(values.size());
  std::vector<double> xs, ps;
  for (double t : thresholds) {
    const auto h = std::count_if(values.begin(), values.end(), [&](double v) { return v > t; });
    rep.hits.push_back(h);
    rep.survival.push_back(static_cast<double>(h) / rep.n);
    rep.ci.push_back(wilson_interval(h, rep.n));
    const bool ok = h >= 10;
    rep.used.push_back(ok);
    rep.dropped = rep.dropped || !ok;
    if (ok) {
      xs.push_back(log_x ? std::log(t) : t);
      ps.push_back(rep.survival.back());
    }
  }
  if (xs.size() < 2) throw ValidationError("fewer than 2 thresholds with at least 10 hits");
  const auto f = weighted_log_fit(xs, ps, rep.n);
  rep.slope = f.slope;
  rep.stderr_slope = f.stderr_slope;
  return rep;
}

// Oracle slope on the thresholds actually used, same weighting.
void attach_oracle(TailReport& rep, const std::vector<double>& oracle, bool log_x) {
  rep.oracle = oracle;
  std::vector<double> xs, ps;
  for (std::size_t k = 0; k < oracle.size(); ++k)
    if (rep.used[k]) {
      xs.push_back(log_x ? std::log(rep.thresholds[k]) : rep.thresholds[k]);
      ps.push_back(oracle[k]);
    }
  rep.oracle_slope = weighted_log_fit(xs, ps, rep.n).slope;
}

// G_T ~ N(mu, s2); beyond T the process continues as Brownian motion with drift -a.
double sup_bound_general(double a, double mu, double s2, double y) {
  const double s = std::sqrt(s2);
  return 1.0 - normal_cdf((y - mu) / s) + std::exp(-2.0 * a * y + 2.0 * a * mu + 2.0 * a * a * s2) *
                                              normal_cdf((y - mu - 2.0 * a * s2) / s);
}

double remainder_general(double a, double mu, double s2, double c) {
  // E[gamma_p(2a, 2 e^{G_T} / c)] by Simpson's rule in the standard normal variable
  const int n = 24000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / n, s = std::sqrt(s2);
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = lo + i * h;
    const double arg = 2.0 * std::exp(std::min(mu + s * z, 700.0)) / c;
    const double f = std::exp(-0.5 * z * z) * boost::math::gamma_p(2.0 * a, arg);
    acc += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return std::min(1.0, acc * h / 3.0 / std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

void DriftedProcessSpec::validate() const {
  if (!(drift_a > 0.0)) throw ValidationError("drift a must be positive");
  if (!(horizon_T > 0.0) || !(dt > 0.0)) throw ValidationError("horizon and time step must be positive");
  if (!(dt < horizon_T / 100.0)) throw ValidationError("time step must be below T/100");
  const double k = horizon_T / dt;
  if (std::abs(k - std::round(k)) > 1e-6 * k) throw ValidationError("T must be a whole number of time steps");
  if (kind != CovarianceKind::custom) return;
  if (!variance) throw ValidationError("custom kind needs a variance function");
  double prev = variance(0.0);
  if (std::abs(prev) > 1e-12) throw ValidationError("custom variance must vanish at t = 0");
  for (int j = 1; j <= steps(); ++j) {
    const double next = variance(j * dt);
    if (!(next >= prev)) throw ValidationError("custom variance must be nondecreasing");
    prev = next;
  }
}

int DriftedProcessSpec::steps() const { return static_cast<int>(std::lround(horizon_T / dt)); }

double DriftedProcessSpec::variance_at(double t) const { return kind == CovarianceKind::brownian ? t : variance(t); }

std::vector<PathSummary> simulate_paths(const DriftedProcessSpec& spec, int n_samples, std::uint64_t seed) {
  spec.validate();
  if (n_samples < 1) throw ValidationError("need at least one sample");
  return simulate(spec, n_samples, seed);
}

double sup_truncation_bound(double a, double T, double y) { return sup_bound_general(a, -a * T, T, y); }

double integral_remainder_probability(double a, double T, double c) { return remainder_general(a, -a * T, T, c); }

double dufresne_survival(double a, double x) { return boost::math::gamma_p(2.0 * a, 2.0 / x); }

TailReport sup_tail_from(const std::vector<PathSummary>& paths, const DriftedProcessSpec& spec,
                         const std::vector<double>& y_list) {
  std::vector<double> v;
  for (const auto& p : paths) v.push_back(p.sup);
  TailReport rep = tail_from(v, y_list, false);
  const double a = spec.drift_a, T = spec.horizon_T;
  rep.target_slope = -2.0 * a;
  for (double y : y_list)
    rep.truncation_bound = std::max(rep.truncation_bound, sup_bound_general(a, -a * T, spec.variance_at(T), y));
  if (spec.kind == CovarianceKind::brownian) {
    std::vector<double> oracle;
    for (double y : y_list) oracle.push_back(std::exp(-2.0 * a * y));
    attach_oracle(rep, oracle, false);
  }
  return rep;
}

TailReport sup_tail(const DriftedProcessSpec& spec, const std::vector<double>& y_list, int n_samples,
                    std::uint64_t seed) {
  if (n_samples < 10000) throw ValidationError("sup tail needs at least 1e4 samples");
  return sup_tail_from(simulate_paths(spec, n_samples, seed), spec, y_list);
}

TailReport exp_integral_tail_from(const std::vector<PathSummary>& paths, const DriftedProcessSpec& spec,
                                  const std::vector<double>& x_list) {
  std::vector<double> v;
  for (const auto& p : paths) v.push_back(p.integral);
  TailReport rep = tail_from(v, x_list, true);
  const double a = spec.drift_a, T = spec.horizon_T;
  rep.target_slope = -2.0 * a;
  // Past T the integral gains e^{G_T} times an independent copy of the whole-line integral.
  rep.truncation_bound = remainder_general(a, -a * T, spec.variance_at(T), 0.01 * x_list.front());
  double smallest = 1.0;
  for (std::size_t k = 0; k < x_list.size(); ++k)
    if (rep.used[k]) smallest = std::min(smallest, rep.survival[k]);
  if (rep.truncation_bound > 0.01 * smallest)
    throw ValidationError("horizon T = " + std::to_string(T) + " too short: remainder probability " +
                          std::to_string(rep.truncation_bound) + " exceeds 1% of the smallest survival; raise T");
  if (spec.kind == CovarianceKind::brownian) {
    std::vector<double> oracle;
    for (double x : x_list) oracle.push_back(dufresne_survival(a, x));
    attach_oracle(rep, oracle, true);
  }
  return rep;
}

TailReport exp_integral_tail(const DriftedProcessSpec& spec, const std::vector<double>& x_list, int n_samples,
                             std::uint64_t seed) {
  if (n_samples < 10000) throw ValidationError("integral tail needs at least 1e4 samples");
  return exp_integral_tail_from(simulate_paths(spec, n_samples, seed), spec, x_list);
}

GaussianConditionReport gaussian_conditions(const DriftedProcessSpec& spec, const std::vector<double>& c_list,
                                            int n_samples, std::uint64_t seed) {
  DriftedProcessSpec s = spec;
  s.drift_a = 0.0;
  s.horizon_T = 1.0;
  if (!(s.dt < 0.01)) throw ValidationError("time step must be below 1/100");
  const auto paths = simulate(s, n_samples, seed);
  GaussianConditionReport rep;
  std::vector<double> ends, sups;
  for (const auto& p : paths) {
    ends.push_back(p.end);
    sups.push_back(p.sup);
  }
  const auto m = mean_estimate(ends);
  rep.mean_end = m.value;
  rep.mean_stderr = m.stderr_;
  rep.variance_end = variance(ends);
  rep.variance_target = s.variance_at(1.0);
  rep.c_list = c_list;
  std::vector<double> x, y;
  for (double c : c_list) {
    const auto h = std::count_if(sups.begin(), sups.end(), [&](double v) { return v >= c; });
    rep.survival.push_back(static_cast<double>(h) / n_samples);
    if (h > 0) {
      x.push_back(c * c);
      y.push_back(std::log(rep.survival.back()));
    }
  }
  if (x.size() < 2) throw ValidationError("Gaussian tail check needs at least 2 thresholds with hits");
  const auto f = fit_line(Eigen::Map<Eigen::VectorXd>(x.data(), x.size()), Eigen::Map<Eigen::VectorXd>(y.data(), y.size()));
  rep.slope_c2 = f.slope;
  rep.r_squared = f.r_squared;
  return rep;
}

}  // namespace lfpp
