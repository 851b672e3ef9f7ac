#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "lfpp/common.hpp"
#include "lfpp/kernel.hpp"
#include "lfpp/radial.hpp"

using namespace lfpp;
using boost::math::quadrature::gauss_kronrod;

namespace {

double radial_quad(const std::function<double(double)>& f, double a, double b, int panels = 200) {
  double s = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + (b - a) * i / panels, hi = a + (b - a) * (i + 1) / panels;
    s += gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, 0);
  }
  return s;
}

}  // namespace

TEST_CASE("radial transform of a gaussian is a gaussian") {
  // exp(-pi |x|^2) is its own Fourier transform in every dimension
  for (int d : {2, 3}) {
    auto f = [](double r) { return std::exp(-std::numbers::pi * r * r); };
    for (double rho : {0.0, 0.3, 1.0, 2.0})
      CHECK(hankel_at(f, d, 8.0, 0.1, rho) == doctest::Approx(std::exp(-std::numbers::pi * rho * rho)).epsilon(1e-9));
  }
  CHECK(radial_bessel(2, 0.0) == doctest::Approx(1.0));
  CHECK(radial_bessel(3, 1.0) == doctest::Approx(std::sin(1.0)));
}

TEST_CASE("bump normalisation against independent quadrature") {
  for (int d : {2, 3})
    for (BumpKind k : {BumpKind::canonical, BumpKind::steep}) {
      const auto b = make_bump(d, k);
      const double s = dimension_constants(d).surface_factor;
      const double l2 = s * radial_quad([&](double r) { return b(r) * b(r) * std::pow(r, d - 1); }, 0.0, 1.0);
      CHECK(l2 == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(b(1.0) == 0.0);
      CHECK(b(1.5) == 0.0);
      CHECK_NOTHROW(validate_bump(b));
    }
  // doubling the squared norm must be refused
  const auto base = make_bump(2);
  const auto bad = make_bump(2, BumpKind::canonical, 1.0, base.amplitude * std::sqrt(2.0));
  CHECK_THROWS_AS(validate_bump(bad), ValidationError);
}

TEST_CASE("bump spectrum against a direct transform") {
  const auto b = make_bump(2);
  const BumpSpectrum spec(b);
  for (double rho : {0.0, 0.5, 1.7, 4.0}) {
    const double direct = 2.0 * std::numbers::pi *
                          radial_quad([&](double r) { return b(r) * r * std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * rho * r); }, 0.0, 1.0);
    CHECK(spec.khat(rho) == doctest::Approx(direct).epsilon(1e-6).scale(1e-3));
  }
  // Plancherel: int |Khat|^2 = int K^2 = 1
  CHECK(dimension_constants(2).surface_factor * spec.total() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kappa_hat against brute force and the scaling identity") {
  const BumpSpectrum spec(make_bump(2));
  for (double eps : {0.1, 0.02})
    for (double zeta : {0.3, 3.0, 30.0}) {
      const double upper = spec.khat_table().x_max() / zeta;
      const double brute = radial_quad([&](double t) { const double k = spec.khat(t * zeta); return t * k * k; }, eps, upper, 2000);
      CHECK(kappa_hat_value(eps, zeta, spec) == doctest::Approx(brute).epsilon(1e-6));
      CHECK(kappa_hat_value(eps, zeta, spec) == doctest::Approx(eps * eps * kappa_hat_value(1.0, eps * zeta, spec)).epsilon(1e-10));
    }
}

TEST_CASE("kernel has unit mass, unit spectrum at zero and scales") {
  const BumpSpectrum spec(make_bump(2));
  const auto k1 = build_kernel(1.0, spec);
  const auto k = build_kernel(0.05, spec);
  CHECK(k.mass == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(k.spectrum_at(0.0) == doctest::Approx(1.0).epsilon(1e-6));
  const double s = dimension_constants(2).surface_factor;
  const double mass = s * radial_quad([&](double r) { return k(r) * r; }, 0.0, 40 * 0.05, 400);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-5));
  for (double u : {0.0, 0.5, 1.0})
    CHECK(k(0.05 * u) == doctest::Approx(k1(u) / (0.05 * 0.05)).epsilon(1e-6));
}

TEST_CASE("white-noise covariance at zero is log(R / eps)") {
  // unit L2 norm of the bump makes every scale contribute dt / t
  const BumpSpectrum spec(make_bump(2));
  CHECK(kappa_exact(0.05, 1.0, 0.0, spec) == doctest::Approx(std::log(20.0)).epsilon(1e-6));
  CHECK(kappa_exact(0.05, 1.0, 2.5, spec) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(kappa_structure(0.05, 1.0, 0.3, spec) ==
        doctest::Approx(2.0 * (kappa_exact(0.05, 1.0, 0.0, spec) - kappa_exact(0.05, 1.0, 0.3, spec))).epsilon(1e-6));
  CHECK_THROWS_AS(kappa_exact(0.05, 0.01, 0.0, spec), ValidationError);
}
