#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lfpp/stats.hpp"

namespace lfpp {

enum class CovarianceKind { brownian, custom };

// X_t centred Gaussian with independent increments, G_t = X_t - a t on [0, T].
struct DriftedProcessSpec {
  double drift_a = 1.0;
  double horizon_T = 20.0;
  double dt = 1e-3;
  CovarianceKind kind = CovarianceKind::brownian;
  // custom kind: Var(X_t), nondecreasing with variance(0) = 0
  std::function<double(double)> variance;
  bool bridge_correction = true;

  void validate() const;
  int steps() const;
  double variance_at(double t) const;
};

struct PathSummary {
  double sup = 0.0;       // sup over [0, T] of G
  double integral = 0.0;  // int_0^T e^{G_t} dt, trapezoid
  double end = 0.0;       // G_T
};

// Sample i uses its own counter streams, so results do not depend on the thread count.
std::vector<PathSummary> simulate_paths(const DriftedProcessSpec& spec, int n_samples, std::uint64_t seed);

struct TailReport {
  std::vector<double> thresholds;
  std::int64_t n = 0;
  std::vector<std::int64_t> hits;
  std::vector<double> survival;
  std::vector<Interval> ci;
  std::vector<bool> used;  // false: fewer than 10 hits, left out of the fit
  bool dropped = false;
  double slope = 0.0;  // weighted fit of log survival against y (sup) or log x (integral)
  double stderr_slope = 0.0;
  double target_slope = 0.0;  // -2a
  std::vector<double> oracle;  // exact survival for brownian input, empty otherwise
  std::optional<double> oracle_slope;
  double truncation_bound = 0.0;  // bound on the survival lost by stopping at T
};

// P(sup_{t<=T} G_t > y). Oracle: exp(-2 a y) for brownian input.
TailReport sup_tail_from(const std::vector<PathSummary>& paths, const DriftedProcessSpec& spec,
                         const std::vector<double>& y_list);
TailReport sup_tail(const DriftedProcessSpec& spec, const std::vector<double>& y_list, int n_samples, std::uint64_t seed);

// P(int_0^T e^{G_t} dt > x). Oracle: gamma_p(2a, 2/x), from 1/int_0^inf e^{G_t} dt ~ Gamma(2a)/2.
// Throws if the part of the integral beyond T is not certified negligible.
TailReport exp_integral_tail_from(const std::vector<PathSummary>& paths, const DriftedProcessSpec& spec,
                                  const std::vector<double>& x_list);
TailReport exp_integral_tail(const DriftedProcessSpec& spec, const std::vector<double>& x_list, int n_samples,
                             std::uint64_t seed);

// Brownian bounds for what lies beyond the horizon.
double sup_truncation_bound(double a, double T, double y);
// P(int_T^inf e^{G_t} dt > c) for brownian input.
double integral_remainder_probability(double a, double T, double c);
double dufresne_survival(double a, double x);

struct GaussianConditionReport {
  double mean_end = 0.0, mean_stderr = 0.0;  // X_1
  double variance_end = 0.0;                 // empirical Var(X_1)
  double variance_target = 1.0;             // variance(1)
  std::vector<double> c_list;
  std::vector<double> survival;              // P(sup_{s<=1} X_s - X_0 >= C)
  double slope_c2 = 0.0;                     // of log survival against C^2
  double r_squared = 0.0;
};

// Mean-zero / variance and Gaussian sup-tail conditions on the undrifted process over [0, 1].
GaussianConditionReport gaussian_conditions(const DriftedProcessSpec& spec, const std::vector<double>& c_list,
                                            int n_samples, std::uint64_t seed);

}  // namespace lfpp
