#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>\n#include <numbers>

#include "lfpp/common.hpp"
#include "lfpp/field.hpp"
#include "lfpp/pipeline.hpp"

using namespace lfpp;

namespace {

GridSpec grid(int n, double side) {
  GridSpec g;
  g.n = n;
  g.spacing = side / n;
  return g;
}

}  // namespace

TEST_CASE("spectral sampler is deterministic and anchored") {
  const auto g = grid(128, 4.0);
  const auto a = sample_spectral_lgf(g, 5), b = sample_spectral_lgf(g, 5), c = sample_spectral_lgf(g, 6);
  CHECK((a.values == b.values).all());
  CHECK(!(a.values == c.values).all());
  CHECK(std::abs(sphere_average(a, Eigen::Vector2d::Zero(), 1.0)) < 1e-9);
}

TEST_CASE("mollifier acts on Fourier modes by the Hankel transform of the profile") {
  // A grid Riemann sum is a poor oracle here: the profile peaks sharply at the origin.
  const auto g = grid(128, 4.0);
  const double eps = 8 * g.spacing, w = 2.0 * std::numbers::pi / g.side();
  const auto kernel = KernelCache::global().kernel(2, BumpKind::canonical, eps);
  auto hankel = [&](double zeta) {
    const int n = 40000;
    const double dr = 20.0 * eps / n;
    double acc = 0.0;
    for (int i = 1; i < n; ++i) {
      const double r = i * dr;
      acc += r * (*kernel)(r) * boost::math::cyl_bessel_j(0, 2.0 * std::numbers::pi * zeta * r);
    }
    return 2.0 * std::numbers::pi * acc * dr;
  };
  const double m1 = hankel(3.0 / g.side()), m2 = hankel(std::sqrt(29.0) / g.side());
  FieldSample f;
  f.grid = g;
  f.values.resize(g.sites());
  Eigen::ArrayXd expect(g.sites());
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    const auto p = g.position(s);
    const double c = std::cos(3 * w * p[0]), t = std::sin(w * (5 * p[0] + 2 * p[1]));
    f.values[s] = c + 0.5 * t;
    expect[s] = m1 * c + 0.5 * m2 * t;
  }
  CHECK(m1 < 0.99);
  CHECK((mollify(f, *kernel).values - expect).abs().maxCoeff() < 1e-6);
}

TEST_CASE("mollifying a constant gives the constant") {
  const auto g = grid(64, 4.0);
  FieldSample f;
  f.grid = g;
  f.values = Eigen::ArrayXd::Constant(g.sites(), 2.5);
  const auto m = mollify(f, *KernelCache::global().kernel(2, BumpKind::canonical, 0.25));
  CHECK((m.values - 2.5).abs().maxCoeff() < 1e-9);
}

TEST_CASE("interpolation and sphere averages on polynomials") {
  const auto g = grid(64, 4.0);
  FieldSample f;
  f.grid = g;
  f.values.resize(g.sites());
  for (std::int64_t s = 0; s < g.sites(); ++s) {
    const auto p = g.position(s);
    f.values[s] = 1.0 + 0.5 * p[0] - 0.25 * p[1];
  }
  const Eigen::Vector2d c(0.3, -0.2);
  CHECK(interpolate(f, c) == doctest::Approx(1.0 + 0.15 + 0.05));
  CHECK(sphere_average(f, c, 0.5) == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(interpolate(f, g.position(100)) == f.values[100]);
}

TEST_CASE("layer edges are geometric between eps and R") {
  const auto e = layer_edges(0.05, 1.0);
  CHECK(e.front() == doctest::Approx(1.0));
  CHECK(e.back() == doctest::Approx(0.05));
  for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] < e[k - 1]);
  const double r0 = e[0] / e[1];
  for (std::size_t k = 2; k < e.size(); ++k) CHECK(e[k - 1] / e[k] == doctest::Approx(r0).epsilon(1e-9));
}

TEST_CASE("white-noise sampler rejects unresolved parameters") {
  const auto g = grid(64, 4.0);
  const auto spec = KernelCache::global().spectrum(2, BumpKind::canonical);
  CHECK_THROWS_AS(sample_white_noise_field(g, g.spacing, 1.0, *spec, 1), ResolutionError);
  CHECK_THROWS_AS(sample_white_noise_field(g, 0.2, 1.5, *spec, 1), ValidationError);
}

TEST_CASE("truncation: Z within its bound and bar mode close to the full convolution") {
  const auto g = grid(256, 4.0);
  const auto f = sample_spectral_lgf(g, 3);
  for (double eps : {0.1, 0.05}) {
    const auto k = KernelCache::global().kernel(2, BumpKind::canonical, eps);
    const auto [a, b] = truncation_radii(eps, TruncationMode::hat_log_power);
    CHECK(std::abs(truncation_normaliser(*k, a, b) - 1.0) <= std::pow(std::log(1.0 / eps), -2.0));
    const auto full = mollify(f, *k);
    const auto bar = truncated_mollify(f, *k, TruncationMode::bar_sqrt_eps);
    CHECK((full.values - bar.field.values).abs().maxCoeff() < 0.05);
  }
  CHECK(cutoff(0.1, 0.2, 0.4) == 1.0);
  CHECK(cutoff(0.5, 0.2, 0.4) == 0.0);
  CHECK(cutoff(0.3, 0.2, 0.4) == doctest::Approx(0.5));
}
