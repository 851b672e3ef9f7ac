#include <doctest.h>

#include <cmath>

#include "lfpp/common.hpp"
#include "lfpp/rng.hpp"
#include "lfpp/scaling.hpp"

using namespace lfpp;

namespace {

GridSpec grid(int n, double side) {
  GridSpec g;
  g.n = n;
  g.spacing = side / n;
  return g;
}

WeightGrid flat(const GridSpec& g) {
  WeightGrid w;
  w.grid = g;
  w.weights = Eigen::ArrayXd::Ones(g.sites());
  return w;
}

CouplingParams bm() { return CouplingParams::from_xi(2, 1.0 / std::sqrt(6.0)); }

}  // namespace

TEST_CASE("exponent fit on an exact power law") {
  std::vector<std::pair<double, double>> pts;
  for (double e : {0.2, 0.1, 0.05, 0.025}) pts.push_back({e, 3.0 * std::pow(e, 0.5)});
  const auto f = fit_distance_exponent(pts, bm());
  CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.implied_xi_q == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*f.target_xi_q == doctest::Approx(5.0 / 6.0));
  std::vector<std::pair<double, double>> narrow = {{0.1, 1.0}, {0.09, 0.9}, {0.08, 0.8}, {0.07, 0.7}};
  CHECK_THROWS_AS(fit_distance_exponent(narrow), ValidationError);
}

TEST_CASE("c_r normalisation ignores a constant shift of the field") {
  const auto g = grid(256, 4.0);
  MetricSetup setup;
  setup.params = bm();
  setup.epsilon = 0.05;
  const auto f = sample_spectral_lgf(g, 21);
  auto shifted = f;
  shifted.values += 0.8;
  const std::vector<double> radii = {1.0, 0.5};
  const Eigen::Vector2d x(-0.5, 0.0), y(0.5, 0.0);
  const auto a = c_r_sample(f, setup, radii, x, y), b = c_r_sample(shifted, setup, radii, x, y);
  for (std::size_t k = 0; k < radii.size(); ++k)
    CHECK(normalized_c_r(a, k, radii[k], setup.params.xi, 5.0 / 6.0) ==
          doctest::Approx(normalized_c_r(b, k, radii[k], setup.params.xi, 5.0 / 6.0)).epsilon(1e-12));
}

TEST_CASE("moments of lognormal samples") {
  auto s = make_stream(5, StreamPurpose::test_data, 0);
  const double sigma = 0.4;
  std::vector<double> v;
  for (int i = 0; i < 100000; ++i) {
    const double u1 = 1.0 - s.uniform01(), u2 = s.uniform01();
    v.push_back(std::exp(sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2)));
  }
  const std::vector<double> p = {-2.0, 1.0, 2.0};
  const auto rep = moment_tail_report(v, p);
  for (std::size_t k = 0; k < p.size(); ++k) {
    // samples are divided by their median, which is 1 up to noise
    const double exact = std::exp(p[k] * p[k] * sigma * sigma / 2.0) * std::pow(rep.median, -p[k]);
    CHECK(std::abs(rep.moments[k] - exact) < 4.0 * rep.moment_stderr[k] + 1e-3);
  }
  CHECK(rep.faster_than_power);
}

TEST_CASE("flat field has Holder exponent one") {
  const auto g = grid(128, 4.0);
  const auto d = holder_distances(flat(g), {1.0 / 16, 1.0 / 8, 1.0 / 4}, 120, 3);
  const auto rep = holder_from_distances(d, {1.0 / 16, 1.0 / 8, 1.0 / 4}, bm());
  CHECK(rep.min == doctest::Approx(1.0).epsilon(0.02));
  CHECK(rep.max == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("thick points") {
  CHECK(predicted_thick_dimension(2, std::sqrt(8.0 / 3.0)) == doctest::Approx(2.0 / 3.0));
  CHECK(predicted_thick_dimension(2, 3.0) == 0.0);
  CHECK(is_thick(std::log(10.0), 0.1, 1.0, 0.0));
  CHECK(!is_thick(0.0, 0.1, 1.0, 0.1));
  const auto g = grid(512, 4.0);
  const auto f = sample_spectral_lgf(g, 8);
  const auto narrow = thick_points(f, 1.0, 4 * g.spacing, 0.1);
  const auto wide = thick_points(f, 1.0, 4 * g.spacing, 0.3);
  // the mask only grows with the window
  std::vector<std::uint8_t> in_wide(g.sites(), 0);
  for (auto s : wide.mask) in_wide[s] = 1;
  for (auto s : narrow.mask) CHECK(in_wide[s]);
  CHECK(wide.mask.size() >= narrow.mask.size());
  const auto none = thick_points(f, 1.2 * std::sqrt(4.0) * 1.2, 4 * g.spacing);
  CHECK((none.empty || none.fitted_dimension < 0.3));
}

TEST_CASE("KPZ formula and covering on the flat metric") {
  const auto p = bm();
  CHECK(predicted_quantum_dimension(p, 2.0) == doctest::Approx(4.0));
  CHECK(predicted_quantum_dimension(p, 1.0) == doctest::Approx((p.Q - std::sqrt(p.Q * p.Q - 2.0)) / p.xi));
  CHECK(kpz_residual(p, 1.0, predicted_quantum_dimension(p, 1.0)) == doctest::Approx(0.0).scale(1.0));
  // tiny xi: q ~ dim / (xi Q)
  const auto tiny = CouplingParams::free(2, 0.01, 200.0);
  CHECK(predicted_quantum_dimension(tiny, 1.0) == doctest::Approx(1.0 / 2.0).epsilon(1e-3));

  const auto g = grid(256, 4.0);
  CHECK(euclidean_box_dimension(g, target_sites(g, TargetKind::box)) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(euclidean_box_dimension(g, target_sites(g, TargetKind::segment)) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(euclidean_box_dimension(g, target_sites(g, TargetKind::cantor)) == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(0.1));

  const auto X = target_sites(g, TargetKind::box);
  const auto radii = greedy_covering_radii(flat(g), X, 400);
  for (std::size_t k = 1; k < radii.size(); ++k) CHECK(radii[k] <= radii[k - 1]);
  for (double delta : {0.4, 0.2, 0.1}) CHECK(covering_number(radii, delta) <= covering_number(radii, delta / 2));
  CHECK(covering_fit_start(2.0) == 16);
  CHECK(covering_fit_start(1.0) == 4);
}

TEST_CASE("covering dimension of a flat box is two") {
  const auto g = grid(512, 4.0);
  const auto X = target_sites(g, TargetKind::box);
  const auto radii = greedy_covering_radii(flat(g), X, static_cast<int>(box_count(g, X, 4 * g.spacing)));
  CHECK(fit_covering_dimension(radii, 8, covering_fit_start(2.0)).dimension == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("shell correlation of independent values is small") {
  auto s = make_stream(9, StreamPurpose::test_data, 0);
  std::vector<std::vector<double>> v(2000, std::vector<double>(4));
  for (auto& row : v)
    for (auto& x : row) x = s.uniform01();
  const auto rep = shell_correlation_from(v, {1.0, 0.5, 0.25, 0.125}, 4);
  CHECK(rep.max_abs_two_apart < 4.0 * rep.stderr_);
  CHECK(rep.corr(0, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(shell_correlation_from(std::vector<std::vector<double>>(5, std::vector<double>(4, 1.0)), {1.0, 0.5, 0.25, 0.125}, 4), ValidationError);
}
