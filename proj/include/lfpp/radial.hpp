#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>

namespace lfpp {

// Log-spaced nodes x_i = lo * (hi/lo)^{i/(n-1)}.
struct LogGrid {
  double lo = 1e-4;
  double hi = 1e4;
  int n = 4096;

  static LogGrid scaled(double scale, int n = 4096) { return {1e-4 * scale, 1e4 * scale, n}; }
  double step() const { return std::log(hi / lo) / (n - 1); }
  double at(int i) const { return lo * std::exp(step() * i); }
  Eigen::ArrayXd nodes() const;
};

// Power-law continuation f(x) ~ amplitude * x^{-power} for x beyond `from`.
// amplitude == 0 means the function is zero there.
struct PowerTail {
  double from = 0.0;
  double amplitude = 0.0;
  double power = 0.0;

  bool is_zero() const { return amplitude == 0.0; }
};

// Radial function tabulated on a LogGrid, local cubic interpolation in log x.
// Below the grid the first value is used; beyond tail.from the tail model is used.
class RadialTable {
 public:
  RadialTable() = default;
  RadialTable(int d, LogGrid grid, Eigen::ArrayXd values, PowerTail tail = {});

  double operator()(double x) const;
  int dimension() const { return d_; }
  const LogGrid& grid() const { return grid_; }
  const Eigen::ArrayXd& values() const { return values_; }
  const PowerTail& tail() const { return tail_; }
  // Largest x where the function is not identically zero (infinity for a power tail).
  double support() const;
  // S_d * integral x^{d-1} f(x) dx over [0, inf), tail included analytically.
  double integrate_radial() const;

 private:
  int d_ = 2;
  LogGrid grid_;
  Eigen::ArrayXd values_;
  PowerTail tail_;
};

// Function on [0, x_max] sampled at uniform spacing, cubic B-spline, zero beyond x_max.
// Used for oscillating spectra that a log grid under-resolves at high frequency.
class UniformTable {
 public:
  UniformTable() = default;
  UniformTable(double step, Eigen::ArrayXd values);

  double operator()(double x) const;
  double step() const { return step_; }
  double x_max() const { return step_ * static_cast<double>(values_.size() - 1); }
  const Eigen::ArrayXd& values() const { return values_; }

 private:
  struct Spline;
  double step_ = 1.0;
  Eigen::ArrayXd values_;
  std::shared_ptr<const Spline> spline_;
};

// Normalised radial Bessel function Lambda_nu(z) = Gamma(nu+1) (2/z)^nu J_nu(z), nu = d/2 - 1.
// The d-dimensional Fourier transform of a radial f is S_d * int f(r) r^{d-1} Lambda(2 pi rho r) dr.
double radial_bessel(int d, double z);

struct HankelOptions {
  // Relative level under which transformed values count as numerically zero.
  double noise_floor = 1e-16;
  // Consecutive sub-floor nodes before the rest of the output is set to zero.
  int floor_run = 24;
  // Allowed absolute contribution of an unresolved power tail.
  double tail_tolerance = 1e-10;
};

// S_d * int_0^support f(r) r^{d-1} dr with Gauss panels refined to the oscillation scale 1/rho.
double radial_integral(const std::function<double(double)>& f, int d, double support, double inner,
                       double rho = 0.0);

// Radial Fourier transform under exp(-2 pi i x.zeta) evaluated at one frequency.
// f is integrated over [0, support]; `inner` is the smallest structural scale of f.
double hankel_at(const std::function<double(double)>& f, int d, double support, double inner, double rho);

// Transform of a callable with compact support, tabulated on out_grid.
RadialTable hankel_transform(const std::function<double(double)>& f, int d, double support, double inner,
                             const LogGrid& out_grid, const HankelOptions& opt = {});

// Transform of a tabulated profile. Throws QuadratureError if its tail is not integrable to tolerance.
RadialTable hankel_transform(const RadialTable& profile, const LogGrid& out_grid, const HankelOptions& opt = {});

}  // namespace lfpp
