#include "lfpp/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <numbers>

namespace lfpp {

using boost::math::quadrature::gauss;

std::string to_string(BumpKind kind) { return kind == BumpKind::canonical ? "canonical" : "steep"; }

BumpKind parse_bump_kind(const std::string& name) {
  if (name == "canonical") return BumpKind::canonical;
  if (name == "steep") return BumpKind::steep;
  throw ValidationError("unknown bump kind '" + name + "' (expected canonical or steep)");
}

double bump_shape(BumpKind kind, double s) {
  s = std::abs(s);
  if (s >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return kind == BumpKind::canonical ? std::exp(-1.0 / q) : std::exp(-1.0 / (q * q));
}

double BumpProfile::operator()(double r) const { return amplitude * bump_shape(kind, r / support_radius); }

namespace {

double shape_l2_squared(int d, BumpKind kind, double support) {
  const double s = dimension_constants(d).surface_factor;
  auto f = [&](double r) {
    const double v = bump_shape(kind, r / support);
    return v * v * std::pow(r, d - 1);
  };
  double sum = 0.0;
  const int panels = 64;
  for (int i = 0; i < panels; ++i)
    sum += gauss<double, 20>::integrate(f, support * i / panels, support * (i + 1) / panels);
  return s * sum;
}

}  // namespace

BumpProfile make_bump(int d, BumpKind kind, double support_radius, std::optional<double> amplitude) {
  if (d < 2) throw ValidationError("bump dimension must be >= 2");
  if (!(support_radius > 0.0)) throw ValidationError("bump support radius must be positive");
  BumpProfile b;
  b.d = d;
  b.kind = kind;
  b.support_radius = support_radius;
  b.amplitude = amplitude ? *amplitude : 1.0 / std::sqrt(shape_l2_squared(d, kind, support_radius));
  const int n = 1025;
  b.radius_grid = Eigen::ArrayXd::LinSpaced(n, 0.0, support_radius);
  b.values.resize(n);
  for (int i = 0; i < n; ++i) b.values[i] = b(b.radius_grid[i]);
  return b;
}

double bump_l2_squared(const BumpProfile& bump) {
  return bump.amplitude * bump.amplitude * shape_l2_squared(bump.d, bump.kind, bump.support_radius);
}

void validate_bump(const BumpProfile& bump) {
  const double norm = bump_l2_squared(bump);
  if (std::abs(norm - 1.0) > 1e-8)
    throw ValidationError("bump normalization violated: integral of K(|x|)^2 over R^d is " + std::to_string(norm) +
                          ", must equal 1");
  const auto n = bump.radius_grid.size();
  if (n != bump.values.size() || n < 3) throw ValidationError("bump tabulation is malformed");
  double peak = 0.0, curvature = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(bump.values[i])) throw ValidationError("bump values must be finite");
    if (bump.radius_grid[i] >= bump.support_radius && bump.values[i] != 0.0)
      throw ValidationError("bump must vanish outside its support radius");
    peak = std::max(peak, std::abs(bump.values[i]));
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h = bump.radius_grid[i + 1] - bump.radius_grid[i];
    curvature = std::max(curvature, std::abs(bump.values[i + 1] - 2 * bump.values[i] + bump.values[i - 1]) / (h * h));
  }
  const double scale = peak / (bump.support_radius * bump.support_radius);
  if (curvature > 1e3 * scale) throw ValidationError("bump is not smooth at its sampling resolution");
}

BumpSpectrum::BumpSpectrum(const BumpProfile& bump)
    : BumpSpectrum([&bump](double r) { return bump(r); }, bump.d, bump.support_radius) {}

BumpSpectrum::BumpSpectrum(const std::function<double(double)>& f, int d, double support) : d_(d) {
  if (d < 2) throw ValidationError("bump spectrum needs d >= 2");
  // 100 nodes per unit of support frequency; stop once |Khat| stays below 1e-16 of its peak
  // for two full oscillation periods.
  const double step = 0.01 / support;
  const int run_needed = 200;
  const int max_nodes = static_cast<int>(1e4 / support / step);
  std::vector<double> v;
  double peak = 0.0;
  int run = 0;
  for (int j = 0; j < max_nodes; ++j) {
    const double k = hankel_at(f, d, support, 0.05 * support, j * step);
    v.push_back(k);
    peak = std::max(peak, std::abs(k));
    run = std::abs(k) < 1e-16 * peak ? run + 1 : 0;
    if (run >= run_needed) break;
  }
  int cut = static_cast<int>(v.size());
  if (run >= run_needed) {
    cut = static_cast<int>(v.size()) - run + 4;
    for (int j = cut - 4; j < cut; ++j) v[j] = 0.0;
  }
  khat_ = UniformTable(step, Eigen::Map<Eigen::ArrayXd>(v.data(), cut));
  t_max_ = khat_.x_max();

  const int n = cut;
  Eigen::ArrayXd pieces = Eigen::ArrayXd::Zero(n);
  for (int j = 0; j + 1 < n; ++j) pieces[j] = piece(j, (j + 1) * step);
  lower_.resize(n);
  upper_.resize(n);
  lower_[0] = 0.0;
  for (int j = 1; j < n; ++j) lower_[j] = lower_[j - 1] + pieces[j - 1];
  upper_[n - 1] = 0.0;
  for (int j = n - 2; j >= 0; --j) upper_[j] = upper_[j + 1] + pieces[j];
  total_ = lower_[n - 1];

  // Certified tail beyond T using |Khat(t)| <= C t^{-d-1} fitted over the last decade.
  double c = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = j * step;
    if (t >= t_max_ / 10) c = std::max(c, std::abs(khat_.values()[j]) * std::pow(t, d + 1));
  }
  tail_certificate_ = c * c * std::pow(t_max_, -d - 2) / (d + 2);
  if (tail_certificate_ > 1e-10 * total_)
    throw QuadratureError("bump spectrum tail is not certified below 1e-10 of the scale integral", tail_certificate_);
}

RadialTable BumpSpectrum::tabulate(const LogGrid& grid) const {
  Eigen::ArrayXd v(grid.n);
  for (int i = 0; i < grid.n; ++i) v[i] = khat(grid.at(i));
  return RadialTable(d_, grid, std::move(v), PowerTail{t_max_, 0.0, 0.0});
}

double BumpSpectrum::piece(int j, double u) const {
  const double a = j * khat_.step();
  if (u <= a) return 0.0;
  auto f = [this](double s) {
    const double k = khat_(s);
    return std::pow(s, d_ - 1) * k * k;
  };
  return gauss<double, 10>::integrate(f, a, u);
}

double BumpSpectrum::upper(double u) const {
  if (u >= t_max_) return 0.0;
  const int j = std::clamp(static_cast<int>(u / khat_.step()), 0, static_cast<int>(upper_.size()) - 2);
  return std::max(0.0, upper_[j] - piece(j, u));
}

double BumpSpectrum::lower(double u) const {
  if (u >= t_max_) return total_;
  const int j = std::clamp(static_cast<int>(u / khat_.step()), 0, static_cast<int>(lower_.size()) - 2);
  return lower_[j] + piece(j, u);
}

double BumpSpectrum::band(double a, double b) const {
  if (b <= a) return 0.0;
  if (std::isinf(b)) return upper(a);
  const double lb = lower(b);
  if (lb < 0.5 * total_) return std::max(0.0, lb - lower(a));
  return std::max(0.0, upper(a) - upper(b));
}

double kappa_hat_value(double epsilon, double zeta, const BumpSpectrum& spectrum, double R) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(R > epsilon)) throw ValidationError("R must exceed epsilon");
  zeta = std::abs(zeta);
  const int d = spectrum.dimension();
  if (zeta == 0.0) {
    if (std::isinf(R)) throw ValidationError("kappa_hat at zeta = 0 requires a finite upper scale R");
    const double k0 = spectrum.khat0();
    return k0 * k0 * (std::pow(R, d) - std::pow(epsilon, d)) / d;
  }
  const double scale = std::pow(zeta, -d);
  if (std::isinf(R)) return scale * spectrum.upper(epsilon * zeta);
  return scale * spectrum.band(epsilon * zeta, R * zeta);
}

RadialTable kappa_hat(double epsilon, const BumpSpectrum& spectrum) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  const LogGrid g = LogGrid::scaled(1.0 / epsilon);
  Eigen::ArrayXd v(g.n);
  for (int i = 0; i < g.n; ++i) v[i] = kappa_hat_value(epsilon, g.at(i), spectrum);
  return RadialTable(spectrum.dimension(), g, std::move(v), PowerTail{spectrum.t_max() / epsilon, 0.0, 0.0});
}

namespace {

// For odd d, Khat_1(zeta) = sqrt(S I0) + b |zeta|^d + O(|zeta|^{d+2}) near 0.
double odd_coefficient(const BumpSpectrum& sp) {
  const int d = sp.dimension();
  const double s = dimension_constants(d).surface_factor;
  const double k0 = sp.khat0();
  return -std::sqrt(s * sp.total()) * k0 * k0 / (2.0 * d * sp.total());
}

// Fourier transform of |zeta|^d exp(-pi zeta^2) in R^d at radius r.
double damped_power_transform(int d, double r) {
  const double a = d, b = 0.5 * d, x = std::numbers::pi * r * r;
  const double pref = std::pow(std::numbers::pi, -0.5 * d) * std::tgamma(a) / std::tgamma(b);
  if (x < 60.0) return pref * boost::math::hypergeometric_1F1(a, b, -x);
  // Large-argument expansion: 1F1(a;b;-x) ~ Gamma(b)/Gamma(b-a) x^{-a} sum (a)_k (a-b+1)_k / k! x^{-k}.
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double next = term * (a + k) * (a - b + 1 + k) / ((k + 1) * x);
    if (std::abs(next) > std::abs(term) || std::abs(next) < 1e-17 * std::abs(sum)) break;
    term = next;
    sum += term;
  }
  return pref * std::tgamma(b) / std::tgamma(b - a) * std::pow(x, -a) * sum;
}

}  // namespace

RadialKernel build_kernel(double epsilon, const BumpSpectrum& spectrum) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  const int d = spectrum.dimension();
  const double s = dimension_constants(d).surface_factor;
  auto ohat = [&](double z) {
    const double v = s * spectrum.upper(epsilon * z);
    if (v < -1e-12) throw Error("negative kernel spectrum beyond noise level");
    return std::sqrt(std::max(0.0, v));
  };
  const double z_support = spectrum.t_max() / epsilon;
  const LogGrid zg = LogGrid::scaled(1.0 / epsilon);
  Eigen::ArrayXd o(zg.n);
  for (int i = 0; i < zg.n; ++i) o[i] = ohat(zg.at(i));
  RadialTable spec_table(d, zg, std::move(o), PowerTail{z_support, 0.0, 0.0});
  const double fine_step = 0.005 / epsilon;
  const int fine_n = static_cast<int>(std::ceil(z_support / fine_step)) + 1;
  Eigen::ArrayXd fine(fine_n);
  for (int j = 0; j < fine_n; ++j) fine[j] = ohat(j * fine_step);
  UniformTable fine_table(fine_step, std::move(fine));

  // Odd d: the |zeta|^d cusp at the origin is removed with a Gaussian-damped copy whose transform is
  // known in closed form; only the smooth remainder is transformed numerically.
  const bool odd = d % 2 == 1;
  const double b = odd ? odd_coefficient(spectrum) : 0.0;
  auto regular = [&](double z) {
    const double u = epsilon * z;
    return fine_table(z) - (odd ? b * std::pow(u, d) * std::exp(-std::numbers::pi * u * u) : 0.0);
  };
  auto singular = [&](double r) { return odd ? b * std::pow(epsilon, -d) * damped_power_transform(d, r / epsilon) : 0.0; };

  const LogGrid rg = LogGrid::scaled(epsilon);
  Eigen::ArrayXd k = Eigen::ArrayXd::Zero(rg.n);
  const double inner = 1e-3 / epsilon;
  double k0 = 0.0;
  int run = 0;
  bool regular_done = false;
  for (int i = 0; i < rg.n; ++i) {
    const double r = rg.at(i);
    double reg = 0.0;
    if (!regular_done) {
      reg = hankel_at(regular, d, z_support, inner, r);
      if (i == 0) k0 = std::abs(reg + singular(r));
      // Below the quadrature noise the remainder is set to zero for good.
      run = r >= 3.0 * epsilon && std::abs(reg) < 1e-11 * k0 ? run + 1 : 0;
      if (run >= 16) {
        for (int j = i - run + 1; j < i; ++j) k[j] = singular(rg.at(j));
        reg = 0.0;
        regular_done = true;
      }
    }
    if (regular_done && !odd) break;
    k[i] = reg + singular(r);
  }
  PowerTail tail;
  if (odd) {
    tail.from = rg.hi;
    tail.power = 2.0 * d;
    tail.amplitude = b * std::pow(epsilon, d) * std::pow(std::numbers::pi, -1.5 * d) * std::tgamma(d) /
                     std::tgamma(-0.5 * d);
  } else if (regular_done) {
    int first = rg.n - 1;
    while (first > 0 && k[first - 1] == 0.0) --first;
    tail.from = rg.at(first);
  }

  RadialKernel out;
  out.epsilon = epsilon;
  out.d = d;
  out.profile = RadialTable(d, rg, std::move(k), tail);
  out.spectrum = std::move(spec_table);
  out.spectrum_fine = std::move(fine_table);
  out.mass = out.profile.integrate_radial();
  const auto& v = out.profile.values();
  for (int i = 0; i < rg.n; ++i)
    out.decay_constant = std::max(out.decay_constant, std::pow(rg.at(i), 2 * d - 1) * std::abs(v[i]));
  return out;
}

RadialKernel build_kernel(double epsilon, const BumpProfile& bump) {
  validate_bump(bump);
  return build_kernel(epsilon, BumpSpectrum(bump));
}

double kappa_exact(double epsilon, double R, double x, const BumpSpectrum& spectrum) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(R > epsilon) || std::isinf(R)) throw ValidationError("kappa_exact needs finite R > epsilon");
  const int d = spectrum.dimension();
  auto f = [&](double z) { return kappa_hat_value(epsilon, z, spectrum, R); };
  return hankel_at(f, d, spectrum.t_max() / epsilon, 1e-3 / R, std::abs(x));
}

double kappa_exact(double epsilon, double R, const Eigen::VectorXd& x, const BumpSpectrum& spectrum) {
  return kappa_exact(epsilon, R, x.norm(), spectrum);
}

double kappa_structure(double epsilon, double R, double x, const BumpSpectrum& spectrum) {
  if (!(epsilon > 0.0) || !(R > epsilon)) throw ValidationError("kappa_structure needs 0 < epsilon < R");
  const int d = spectrum.dimension();
  const double w = 2.0 * std::numbers::pi * std::abs(x);
  auto f = [&](double z) {
    if (z == 0.0) return 0.0;
    return kappa_hat_value(epsilon, z, spectrum, R) * (1.0 - radial_bessel(d, w * z));
  };
  const double inner = std::isinf(R) ? 1e-3 / std::max(std::abs(x), epsilon) : 1e-3 / R;
  return 2.0 * radial_integral(f, d, spectrum.t_max() / epsilon, inner, std::abs(x));
}

}  // namespace lfpp
