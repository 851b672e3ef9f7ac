#include "lfpp/radial.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "lfpp/common.hpp"

namespace lfpp {

using boost::math::quadrature::gauss;
using Fast = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

Eigen::ArrayXd LogGrid::nodes() const {
  Eigen::ArrayXd x(n);
  for (int i = 0; i < n; ++i) x[i] = at(i);
  return x;
}

RadialTable::RadialTable(int d, LogGrid grid, Eigen::ArrayXd values, PowerTail tail)
    : d_(d), grid_(grid), values_(std::move(values)), tail_(tail) {
  if (values_.size() != grid_.n) throw ValidationError("radial table size does not match its grid");
  if (values_.size() < 4) throw ValidationError("radial table needs at least 4 nodes");
  if (tail_.from <= 0.0 || tail_.from > grid_.hi) tail_.from = grid_.hi;
}

double RadialTable::operator()(double x) const {
  x = std::abs(x);
  if (x >= tail_.from) return tail_.is_zero() ? 0.0 : tail_.amplitude * std::pow(x, -tail_.power);
  if (x <= grid_.lo) return values_[0];
  // Local four-point cubic in log x; a global spline would smear rounding across the table's dynamic range.
  const double t = std::log(x / grid_.lo) / grid_.step();
  const int i = std::clamp(static_cast<int>(t) - 1, 0, grid_.n - 4);
  const double u = t - i;
  const double* f = values_.data() + i;
  const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6, l1 = u * (u - 2) * (u - 3) / 2;
  const double l2 = -u * (u - 1) * (u - 3) / 2, l3 = u * (u - 1) * (u - 2) / 6;
  return l0 * f[0] + l1 * f[1] + l2 * f[2] + l3 * f[3];
}

double RadialTable::support() const {
  if (!tail_.is_zero()) return std::numeric_limits<double>::infinity();
  int last = static_cast<int>(values_.size()) - 1;
  while (last >= 0 && values_[last] == 0.0) --last;
  if (last < 0) return 0.0;
  return std::min(tail_.from, grid_.at(std::min(last + 1, grid_.n - 1)));
}

double RadialTable::integrate_radial() const {
  const double s = dimension_constants(d_).surface_factor;
  const double lo = std::log(grid_.lo), top = std::log(std::min(tail_.from, grid_.hi));
  const double h = grid_.step();
  double sum = values_[0] * std::pow(grid_.lo, d_) / d_;
  auto integrand = [&](double u) {
    const double x = std::exp(u);
    return std::pow(x, d_) * (*this)(x);
  };
  for (int i = 0; i + 1 < grid_.n; ++i) {
    const double a = lo + i * h;
    if (a >= top) break;
    const double b = std::min(a + h, top);
    sum += gauss<double, 7>::integrate(integrand, a, b);
  }
  if (!tail_.is_zero()) {
    if (tail_.power <= d_) throw QuadratureError("radial tail is not integrable", std::abs(tail_.amplitude));
    sum += tail_.amplitude * std::pow(tail_.from, d_ - tail_.power) / (tail_.power - d_);
  }
  return s * sum;
}

struct UniformTable::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> s;
};

UniformTable::UniformTable(double step, Eigen::ArrayXd values) : step_(step), values_(std::move(values)) {
  if (values_.size() < 4 || !(step_ > 0.0)) throw ValidationError("uniform table needs >= 4 nodes and a positive step");
  spline_ = std::make_shared<Spline>(Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(
      values_.data(), static_cast<std::size_t>(values_.size()), 0.0, step_, 0.0)});
}

double UniformTable::operator()(double x) const {
  x = std::abs(x);
  if (x >= x_max()) return 0.0;
  return spline_->s(x);
}

double radial_bessel(int d, double z) {
  z = std::abs(z);
  const double nu = 0.5 * d - 1.0;
  if (z < 1e-3) {
    const double z2 = z * z;
    return 1.0 - z2 / (4.0 * (nu + 1.0)) + z2 * z2 / (32.0 * (nu + 1.0) * (nu + 2.0));
  }
  switch (d) {
    case 2:
      return ::j0(z);
    case 3:
      return std::sin(z) / z;
    case 4:
      return 2.0 * ::j1(z) / z;
    default:
      break;
  }
  if (d % 2 == 0) {
    const int n = d / 2 - 1;
    return std::tgamma(nu + 1.0) * std::pow(2.0 / z, nu) * ::jn(n, z);
  }
  const unsigned n = static_cast<unsigned>((d - 3) / 2);
  return std::tgamma(nu + 1.0) * std::pow(2.0 / z, nu) * std::sqrt(2.0 * z / std::numbers::pi) *
         boost::math::sph_bessel(n, z, Fast());
}

namespace {

// Panel breakpoints: [0, inner], geometric up to support, refined to one oscillation period.
std::vector<double> panels(double support, double inner, double rho) {
  std::vector<double> cuts{0.0};
  inner = std::min(inner, support);
  double x = inner;
  while (x < support) {
    cuts.push_back(x);
    x *= 1.15;
  }
  cuts.push_back(support);
  if (rho <= 0.0) return cuts;
  const double width = 1.0 / rho;
  std::vector<double> refined{0.0};
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double a = cuts[i - 1], b = cuts[i];
    const int m = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
    for (int k = 1; k <= m; ++k) refined.push_back(a + (b - a) * k / m);
  }
  return refined;
}

}  // namespace

double radial_integral(const std::function<double(double)>& f, int d, double support, double inner, double rho) {
  const double s = dimension_constants(d).surface_factor;
  const auto cuts = panels(support, inner, rho);
  auto integrand = [&](double r) { return f(r) * std::pow(r, d - 1); };
  double sum = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) sum += gauss<double, 20>::integrate(integrand, cuts[i - 1], cuts[i]);
  return s * sum;
}

double hankel_at(const std::function<double(double)>& f, int d, double support, double inner, double rho) {
  const double w = 2.0 * std::numbers::pi * rho;
  return radial_integral([&](double r) { return f(r) * radial_bessel(d, w * r); }, d, support, inner, rho);
}

RadialTable hankel_transform(const std::function<double(double)>& f, int d, double support, double inner,
                             const LogGrid& out_grid, const HankelOptions& opt) {
  if (d < 2) throw ValidationError("hankel_transform needs d >= 2");
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(out_grid.n);
  double peak = 0.0;
  int run = 0;
  PowerTail tail;
  for (int i = 0; i < out_grid.n; ++i) {
    out[i] = hankel_at(f, d, support, inner, out_grid.at(i));
    peak = std::max(peak, std::abs(out[i]));
    run = std::abs(out[i]) < opt.noise_floor * peak ? run + 1 : 0;
    if (run >= opt.floor_run) {
      for (int k = i - run + 1; k <= i; ++k) out[k] = 0.0;
      tail.from = out_grid.at(i - run + 1);
      break;
    }
  }
  return RadialTable(d, out_grid, std::move(out), tail);
}

RadialTable hankel_transform(const RadialTable& profile, const LogGrid& out_grid, const HankelOptions& opt) {
  const int d = profile.dimension();
  double support = profile.support();
  const double s = dimension_constants(d).surface_factor;
  if (!std::isfinite(support)) {
    const PowerTail& t = profile.tail();
    const double bound = t.power > d ? s * std::abs(t.amplitude) * std::pow(t.from, d - t.power) / (t.power - d)
                                     : std::numeric_limits<double>::infinity();
    if (bound > opt.tail_tolerance) throw QuadratureError("profile tail too heavy for hankel_transform", bound);
    support = t.from;
  } else if (support >= profile.grid().hi) {
    const double edge = std::abs(profile.values()[profile.grid().n - 1]);
    const double bound = s * edge * std::pow(support, d);
    if (bound > opt.tail_tolerance) throw QuadratureError("profile not decayed at the end of its grid", bound);
  }
  return hankel_transform([&profile](double r) { return profile(r); }, d, support, profile.grid().lo, out_grid,
                          opt);
}

}  // namespace lfpp
