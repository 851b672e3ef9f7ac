#include <doctest.h>

#include <cmath>
#include <string>

#include "lfpp/common.hpp"
#include "lfpp/gwtools.hpp"

using namespace lfpp;

TEST_CASE("dufresne survival at a = 1/2 is 1 - exp(-2/x)") {
  for (double x : {0.3, 1.0, 4.0, 50.0}) CHECK(dufresne_survival(0.5, x) == doctest::Approx(1.0 - std::exp(-2.0 / x)).epsilon(1e-12));
  // a = 1: 2/I ~ Gamma(2), P(I > x) = 1 - (1 + y) e^{-y} with y = 2/x
  const double y = 2.0 / 3.0;
  CHECK(dufresne_survival(1.0, 3.0) == doctest::Approx(1.0 - (1.0 + y) * std::exp(-y)).epsilon(1e-12));
}

TEST_CASE("sup tail of drifted brownian motion") {
  DriftedProcessSpec s;
  s.drift_a = 1.0;
  s.horizon_T = 10.0;
  s.dt = 0.01;
  const auto paths = simulate_paths(s, 20000, 3);
  const auto rep = sup_tail_from(paths, s, {0.5, 1.0, 1.5});
  CHECK(rep.survival[1] == doctest::Approx(std::exp(-2.0)).epsilon(0.06));
  CHECK(rep.oracle[1] == doctest::Approx(std::exp(-2.0)));
  CHECK(rep.slope == doctest::Approx(-2.0).epsilon(0.1));
  CHECK(rep.truncation_bound < 0.01 * rep.survival[0]);
  // sup includes t = 0, so it is never negative
  for (const auto& p : paths) CHECK(p.sup >= 0.0);
  const auto again = simulate_paths(s, 100, 3);
  for (int i = 0; i < 100; ++i) CHECK(again[i].integral == paths[i].integral);
}

TEST_CASE("gw input validation") {
  DriftedProcessSpec s;
  s.horizon_T = 2.0;
  s.dt = 0.01;
  s.drift_a = 0.5;
  CHECK_THROWS_AS(sup_tail(s, {1.0, 2.0}, 500, 1), ValidationError);
  const auto paths = simulate_paths(s, 4000, 1);
  try {
    exp_integral_tail_from(paths, s, {1.0, 2.0});
    FAIL("short horizon accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("too short") != std::string::npos);
  }
  DriftedProcessSpec bad;
  bad.dt = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = DriftedProcessSpec{};
  bad.kind = CovarianceKind::custom;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.variance = [](double t) { return 1.0 - t; };
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("custom covariance equal to brownian matches the brownian kind") {
  DriftedProcessSpec a;
  a.horizon_T = 5.0;
  a.dt = 0.01;
  auto b = a;
  b.kind = CovarianceKind::custom;
  b.variance = [](double t) { return t; };
  const auto pa = simulate_paths(a, 50, 11), pb = simulate_paths(b, 50, 11);
  for (int i = 0; i < 50; ++i) CHECK(pb[i].end == doctest::Approx(pa[i].end).epsilon(1e-9));
}

TEST_CASE("gaussian conditions for brownian input") {
  DriftedProcessSpec s;
  s.horizon_T = 10.0;
  s.dt = 0.005;
  const auto rep = gaussian_conditions(s, {0.5, 1.0, 1.5, 2.0}, 20000, 4);
  CHECK(std::abs(rep.mean_end) < 4.0 * rep.mean_stderr);
  CHECK(rep.variance_end == doctest::Approx(1.0).epsilon(0.05));
  // P(sup B >= C) = 2 (1 - Phi(C)); its log-slope against C^2 over [0.5, 2] is about -0.7
  CHECK(rep.slope_c2 < -0.5);
  CHECK(rep.slope_c2 > -0.9);
}
