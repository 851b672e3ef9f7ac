#include "lfpp/field.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "lfpp/common.hpp"
#include "lfpp/rng.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

namespace {

constexpr std::int64_t kNoiseBlock = 4096;

// iid N(0,1) per site. Each block of sites owns its own counter stream, so the result does not
// depend on how blocks are scheduled.
Eigen::ArrayXd white_noise(std::int64_t sites, std::uint64_t seed, StreamPurpose purpose, std::uint32_t sub) {
  Eigen::ArrayXd z(sites);
  const std::int64_t blocks = (sites + kNoiseBlock - 1) / kNoiseBlock;
  tbb::parallel_for(std::int64_t{0}, blocks, [&](std::int64_t b) {
    auto rng = make_stream(seed, purpose, sub, static_cast<std::uint32_t>(b));
    std::normal_distribution<double> normal;
    const std::int64_t end = std::min(sites, (b + 1) * kNoiseBlock);
    for (std::int64_t s = b * kNoiseBlock; s < end; ++s) z[s] = normal(rng);
  });
  return z;
}

double lerp(double a, double b, double t) { return a + t * (b - a); }

void check_sphere(const GridSpec& g, const Eigen::VectorXd& center, double radius) {
  if (center.size() != g.d) throw ValidationError("sphere center has wrong dimension");
  if (radius < 2.0 * g.spacing) throw ResolutionError("sphere radius " + std::to_string(radius) + " below two grid spacings");
  const double reach = center.cwiseAbs().maxCoeff() + radius;
  if (reach > 0.5 * g.side()) throw ValidationError("sphere does not fit in the box");
}

}  // namespace

std::string to_string(Sampler s) { return s == Sampler::spectral ? "spectral" : "white_noise_layers"; }

Eigen::ArrayXd LayerStack::partial_sum(std::size_t k) const {
  if (layers.empty()) throw ValidationError("empty layer stack");
  Eigen::ArrayXd out = layers[0];
  for (std::size_t j = 1; j <= k && j < layers.size(); ++j) out += layers[j];
  return out;
}

std::vector<double> layer_edges(double epsilon, double R, double rho) {
  if (!(epsilon > 0.0) || !(R > epsilon)) throw ValidationError("layer edges need 0 < epsilon < R");
  const int k = std::max(1, static_cast<int>(std::ceil(std::log(R / epsilon) / std::log(rho) - 1e-9)));
  const double step = std::pow(R / epsilon, 1.0 / k);
  std::vector<double> t(k + 1);
  t[0] = R;
  t[k] = epsilon;
  for (int j = 1; j < k; ++j) t[j] = epsilon * std::pow(step, k - j);
  return t;
}

FieldSample sample_spectral_lgf(const GridSpec& grid, std::uint64_t seed, const SpectralOptions& opt) {
  grid.validate();
  const auto fft = shared_fft(grid);
  const double cd = dimension_constants(grid.d).c_d;
  const double p = opt.exponent.value_or(grid.d);
  const double norm = std::pow(grid.spacing, -0.5 * grid.d);
  const Eigen::ArrayXd mult = fft->radial_multiplier([&](double z) {
    return z == 0.0 ? 0.0 : std::sqrt(cd * std::pow(z, -p)) * norm;
  });
  FieldSample f;
  f.grid = grid;
  f.values = fft->filter(white_noise(grid.sites(), seed, StreamPurpose::spectral_noise, 0), mult);
  f.sampler = Sampler::spectral;
  f.seed = seed;
  if (opt.anchor && 1.0 <= 0.5 * grid.side() - 2.0 * grid.spacing)
    f = anchor_field(std::move(f), Eigen::VectorXd::Zero(grid.d), 1.0);
  return f;
}

void check_white_noise_params(const GridSpec& grid, double epsilon, double R) {
  grid.validate();
  if (epsilon < 2.0 * grid.spacing)
    throw ResolutionError("epsilon " + std::to_string(epsilon) + " is below two grid spacings");
  if (!(R > epsilon)) throw ValidationError("R must exceed epsilon");
  if (R > 0.25 * grid.side()) throw ValidationError("R exceeds a quarter of the box side (periodization)");
}

namespace {

// Spectrum of the summed layers [from edge k0 to edge k1) before the inverse transform.
Eigen::ArrayXcd layer_spectrum(const GridFft& fft, const std::vector<double>& t, std::size_t k,
                               const BumpSpectrum& bump, std::uint64_t seed) {
  const GridSpec& g = fft.grid();
  const double hi = t[k], lo = t[k + 1];
  const double tm = 0.5 * (hi + lo), dt = hi - lo;
  const double pref = std::sqrt(dt) * std::pow(tm, 0.5 * (g.d - 1)) * std::pow(g.spacing, -0.5 * g.d);
  const Eigen::ArrayXd mult = fft.radial_multiplier([&](double z) { return pref * bump.khat(tm * z); });
  Eigen::ArrayXcd spec = fft.forward(white_noise(g.sites(), seed, StreamPurpose::layer_noise, static_cast<std::uint32_t>(k)));
  spec *= mult;
  return spec;
}

}  // namespace

FieldSample sample_white_noise_field(const GridSpec& grid, double epsilon, double R, const BumpSpectrum& bump,
                                     std::uint64_t seed) {
  check_white_noise_params(grid, epsilon, R);
  if (bump.dimension() != grid.d) throw ValidationError("bump dimension differs from grid dimension");
  const auto fft = shared_fft(grid);
  const auto t = layer_edges(epsilon, R);
  Eigen::ArrayXcd total = Eigen::ArrayXcd::Zero(fft->spectrum_size());
  for (std::size_t k = 0; k + 1 < t.size(); ++k) total += layer_spectrum(*fft, t, k, bump, seed);
  FieldSample f;
  f.grid = grid;
  f.values = fft->inverse(std::move(total));
  f.epsilon = epsilon;
  f.sampler = Sampler::white_noise_layers;
  f.seed = seed;
  return f;
}

FieldSample sample_white_noise_field(const GridSpec& grid, double epsilon, double R, const BumpProfile& bump,
                                     std::uint64_t seed) {
  validate_bump(bump);
  return sample_white_noise_field(grid, epsilon, R, BumpSpectrum(bump), seed);
}

LayerStack sample_white_noise_layers(const GridSpec& grid, double epsilon, double R, const BumpSpectrum& bump,
                                     std::uint64_t seed) {
  check_white_noise_params(grid, epsilon, R);
  const auto fft = shared_fft(grid);
  LayerStack st;
  st.t_layers = layer_edges(epsilon, R);
  st.epsilon_bottom = epsilon;
  st.R_top = R;
  for (std::size_t k = 0; k + 1 < st.t_layers.size(); ++k)
    st.layers.push_back(fft->inverse(layer_spectrum(*fft, st.t_layers, k, bump, seed)));
  return st;
}

Mollifier::Mollifier(const GridSpec& grid, const RadialKernel& kernel) : epsilon_(kernel.epsilon) {
  grid.validate();
  if (kernel.d != grid.d) throw ValidationError("kernel dimension differs from grid dimension");
  if (kernel.epsilon < 2.0 * grid.spacing)
    throw ResolutionError("kernel epsilon " + std::to_string(kernel.epsilon) + " is below two grid spacings");
  fft_ = shared_fft(grid);
  // Unit mass is the defining property; the tabulated value at 0 differs from 1 only by quadrature error.
  const double k0 = kernel.spectrum_at(0.0);
  multiplier_ = fft_->radial_multiplier([&](double z) { return kernel.spectrum_at(z) / k0; });
}

FieldSample Mollifier::apply(const FieldSample& field) const {
  if (!(field.grid == fft_->grid())) throw ValidationError("field grid differs from mollifier grid");
  FieldSample out = field;
  out.values = fft_->filter(field.values, multiplier_);
  out.epsilon = epsilon_;
  return out;
}

FieldSample mollify(const FieldSample& field, const RadialKernel& kernel) {
  return Mollifier(field.grid, kernel).apply(field);
}

double kernel_mass_beyond(const RadialKernel& kernel, double r) {
  const RadialTable& k = kernel.profile;
  const double s = dimension_constants(kernel.d).surface_factor;
  const auto& tail = k.tail();
  const double table_end = tail.from > 0.0 ? tail.from : k.grid().hi;
  double m = 0.0;
  if (r < table_end) {
    const double lo = std::max(r, k.grid().lo);
    auto f = [&](double x) { return k(x) * std::pow(x, kernel.d - 1); };
    for (double a = lo; a < table_end;) {
      const double b = std::min(table_end, a * 1.1);
      m += boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
      a = b;
    }
  }
  if (!tail.is_zero()) {
    const double from = std::max(r, tail.from);
    m += tail.amplitude * std::pow(from, kernel.d - tail.power) / (tail.power - kernel.d);
  }
  return s * m;
}

double interpolate(const FieldSample& field, const Eigen::VectorXd& x) {
  const GridSpec& g = field.grid;
  const int n = g.n;
  int i0[3], i1[3];
  double t[3];
  for (int a = 0; a < g.d; ++a) {
    const double u = x[a] / g.spacing + n / 2;
    const double fl = std::floor(u);
    t[a] = u - fl;
    const long k = static_cast<long>(fl);
    i0[a] = static_cast<int>(((k % n) + n) % n);
    i1[a] = (i0[a] + 1) % n;
  }
  const auto& v = field.values;
  if (g.d == 2) {
    auto at = [&](int i, int j) { return v[static_cast<std::int64_t>(i) * n + j]; };
    return lerp(lerp(at(i0[0], i0[1]), at(i0[0], i1[1]), t[1]), lerp(at(i1[0], i0[1]), at(i1[0], i1[1]), t[1]), t[0]);
  }
  auto at = [&](int i, int j, int k) { return v[(static_cast<std::int64_t>(i) * n + j) * n + k]; };
  auto plane = [&](int i) {
    return lerp(lerp(at(i, i0[1], i0[2]), at(i, i0[1], i1[2]), t[2]), lerp(at(i, i1[1], i0[2]), at(i, i1[1], i1[2]), t[2]),
                t[1]);
  };
  return lerp(plane(i0[0]), plane(i1[0]), t[0]);
}

std::vector<Eigen::VectorXd> sphere_nodes(int d, int n) {
  std::vector<Eigen::VectorXd> p(n, Eigen::VectorXd(d));
  if (d == 2) {
    for (int i = 0; i < n; ++i) {
      const double th = 2.0 * std::numbers::pi * (i + 0.5) / n;
      p[i] << std::cos(th), std::sin(th);
    }
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / n;
      const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
      p[i] << rr * std::cos(golden * i), rr * std::sin(golden * i), z;
    }
  }
  return p;
}

int sphere_quadrature_size(int d, double radius, double spacing) {
  const double cells = 4.0 * std::numbers::pi * std::pow(radius / spacing, d - 1);
  return std::max(64, static_cast<int>(std::ceil(cells)));
}

double sphere_average(const FieldSample& field, const Eigen::VectorXd& center, double radius) {
  const GridSpec& g = field.grid;
  check_sphere(g, center, radius);
  const auto nodes = sphere_nodes(g.d, sphere_quadrature_size(g.d, radius, g.spacing));
  // Mean taken relative to the first node so a constant field comes back unchanged.
  const double v0 = interpolate(field, center + radius * nodes[0]);
  double acc = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) acc += interpolate(field, center + radius * nodes[i]) - v0;
  return v0 + acc / static_cast<double>(nodes.size());
}

FieldSample sphere_average_field(const FieldSample& field, double radius) {
  const int d = field.grid.d;
  auto fft = shared_fft(field.grid);
  const auto m = fft->radial_multiplier([&](double z) { return radial_bessel(d, 2.0 * std::numbers::pi * radius * z); });
  FieldSample out = field;
  out.values = fft->filter(field.values, m);
  return out;
}

FieldSample anchor_field(FieldSample field, const Eigen::VectorXd& center, double radius) {
  const double a = sphere_average(field, center, radius);
  field.values -= a;
  field.anchor = Anchor{center, radius};
  return field;
}

std::pair<double, double> truncation_radii(double epsilon, TruncationMode mode) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw ValidationError("truncation needs 0 < epsilon < 1");
  if (mode == TruncationMode::bar_sqrt_eps) return {0.5 * std::sqrt(epsilon), std::sqrt(epsilon)};
  const double r = epsilon * std::pow(std::log(1.0 / epsilon), 10);
  return {0.5 * r, r};
}

double cutoff(double r, double a, double b) {
  if (r <= a) return 1.0;
  if (r >= b) return 0.0;
  const double s = (b - r) / (b - a);
  const double p = std::exp(-1.0 / s), q = std::exp(-1.0 / (1.0 - s));
  return p / (p + q);
}

double truncation_normaliser(const RadialKernel& kernel, double r_inner, double r_outer) {
  const double s = dimension_constants(kernel.d).surface_factor;
  auto f = [&](double x) { return (1.0 - cutoff(x, r_inner, r_outer)) * kernel(x) * std::pow(x, kernel.d - 1); };
  double band = 0.0;
  const int panels = 64;
  for (int i = 0; i < panels; ++i) {
    const double a = r_inner + (r_outer - r_inner) * i / panels, b = r_inner + (r_outer - r_inner) * (i + 1) / panels;
    band += boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
  }
  // Relative to the unit-mass kernel that mollify applies.
  return 1.0 - (s * band + kernel_mass_beyond(kernel, r_outer)) / kernel.mass;
}

TruncatedField truncated_mollify(const FieldSample& field, const RadialKernel& kernel, TruncationMode mode) {
  const GridSpec& g = field.grid;
  const auto [a, b] = truncation_radii(kernel.epsilon, mode);
  if (a < 2.0 * g.spacing) throw ResolutionError("truncation radius below two grid spacings");
  TruncatedField out;
  out.r_inner = a;
  out.r_outer = b;
  if (mode == TruncationMode::hat_log_power) out.Z = truncation_normaliser(kernel, a, b);
  out.exact = a >= std::sqrt(static_cast<double>(g.d)) * g.side();
  if (out.exact) {
    out.field = mollify(field, kernel);
    if (out.Z != 1.0) out.field.values /= out.Z;
    return out;
  }
  Mollifier check(g, kernel);  // same resolution rules as mollify
  const auto fft = shared_fft(g);
  const double zmax = fft->frequency_norms().maxCoeff();
  const double step = 0.02 / b;
  const int nz = static_cast<int>(std::ceil(zmax / step)) + 4;
  auto f = [&](double r) { return kernel(r) * cutoff(r, a, b); };
  const double k0 = kernel.spectrum_at(0.0);
  Eigen::ArrayXd tab(nz);
  tbb::parallel_for(0, nz, [&](int j) { tab[j] = hankel_at(f, g.d, b, 0.05 * std::min(kernel.epsilon, a), j * step) / k0; });
  UniformTable table(step, std::move(tab));
  Eigen::ArrayXd mult = fft->radial_multiplier([&](double z) { return table(z); });
  if (mode == TruncationMode::hat_log_power) mult /= out.Z;
  out.field = field;
  out.field.values = fft->filter(field.values, mult);
  out.field.epsilon = kernel.epsilon;
  return out;
}

namespace {

std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> increment_pairs(int d) {
  const double raw[5][4] = {{0.0, 0.0, 0.5, 0.0},
                            {0.0, 0.0, 0.0, 0.5},
                            {-0.25, -0.25, 0.25, 0.1},
                            {0.3, -0.2, -0.1, 0.1},
                            {-0.4, 0.2, 0.0, -0.1}};
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> out;
  for (const auto& r : raw) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d), y = Eigen::VectorXd::Zero(d);
    x[0] = r[0];
    x[1] = r[1];
    y[0] = r[2];
    y[1] = r[3];
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace

RescaleReport rescale_field_check(const std::vector<FieldSample>& ensemble, double r, double rho, double alpha) {
  if (ensemble.size() < 200) throw ValidationError("rescale check needs at least 200 samples");
  if (!(r > 0.0) || r > 1.0) throw ValidationError("rescale factor must lie in (0, 1]");
  const GridSpec& g = ensemble.front().grid;
  if (r * rho < 2.0 * g.spacing) throw ResolutionError("rescaled circle radius below two grid spacings");
  const auto pairs = increment_pairs(g.d);
  RescaleReport rep;
  rep.r = r;
  rep.ensemble = static_cast<int>(ensemble.size());
  const std::size_t n = ensemble.size();
  for (const auto& [x, y] : pairs) {
    std::vector<double> base(n), scaled(n);
    tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) {
      const FieldSample& f = ensemble[i];
      base[i] = sphere_average(f, x, rho) - sphere_average(f, y, rho);
      scaled[i] = r == 1.0 ? base[i] : sphere_average(f, r * x, r * rho) - sphere_average(f, r * y, r * rho);
    });
    const KsResult ks = ks_two_sample(scaled, base);
    rep.ks_statistic.push_back(ks.statistic);
    rep.p_values.push_back(ks.p_value);
  }
  const double pmin = *std::min_element(rep.p_values.begin(), rep.p_values.end());
  rep.min_p_bonferroni = std::min(1.0, pmin * static_cast<double>(pairs.size()));
  rep.pass = rep.min_p_bonferroni > alpha;
  return rep;
}

}  // namespace lfpp
