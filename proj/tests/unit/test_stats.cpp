#include <doctest.h>

#include <cmath>

#include "lfpp/common.hpp"
#include "lfpp/rng.hpp"
#include "lfpp/stats.hpp"

using namespace lfpp;

TEST_CASE("line fit recovers an exact line") {
  Eigen::VectorXd x(5), y(5);
  x << 0, 1, 2, 3, 4;
  y = 2.5 * x.array() - 1.0;
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line(Eigen::VectorXd::Ones(3), y.head(3)), ValidationError);
}

TEST_CASE("order statistics") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK(variance({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("wilson interval matches the closed form") {
  const auto ci = wilson_interval(50, 100);
  // (p + z^2/2n +- z sqrt(p(1-p)/n + z^2/4n^2)) / (1 + z^2/n)
  const double z = 1.959963984540054, n = 100, p = 0.5;
  const double c = (p + z * z / (2 * n)) / (1 + z * z / n);
  const double h = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n);
  CHECK(ci.lo == doctest::Approx(c - h).epsilon(1e-12));
  CHECK(ci.hi == doctest::Approx(c + h).epsilon(1e-12));
  const auto zero = wilson_interval(0, 100);
  CHECK(zero.lo == doctest::Approx(0.0));
  CHECK(zero.hi > 0.0);
}

TEST_CASE("kolmogorov distribution reference values") {
  CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.26999967).epsilon(1e-6));
  CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494).epsilon(1e-2));
  CHECK(kolmogorov_survival(0.0) == doctest::Approx(1.0));
}

TEST_CASE("two-sample KS") {
  std::vector<double> a, b;
  auto s = make_stream(3, StreamPurpose::test_data, 0);
  for (int i = 0; i < 2000; ++i) a.push_back(s.uniform01());
  for (int i = 0; i < 2000; ++i) b.push_back(s.uniform01());
  const auto same = ks_two_sample(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(ks_two_sample(a, b).p_value > 1e-3);
  std::vector<double> shifted = b;
  for (auto& v : shifted) v += 0.2;
  const auto far = ks_two_sample(a, shifted);
  CHECK(far.statistic == doctest::Approx(0.2).epsilon(0.15));
  CHECK(far.p_value < 1e-10);
}

TEST_CASE("pearson and covariance") {
  std::vector<double> x = {1, 2, 3, 4, 5}, y = {2, 4, 6, 8, 10}, z = {5, 4, 3, 2, 1};
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(pearson(x, z) == doctest::Approx(-1.0));
  CHECK(covariance(x, y).value == doctest::Approx(5.0));
}

TEST_CASE("bootstrap median interval is reproducible and covers the median") {
  std::vector<double> v;
  auto s = make_stream(4, StreamPurpose::test_data, 0);
  for (int i = 0; i < 500; ++i) v.push_back(s.uniform01());
  const auto a = bootstrap_median_ci(v, 11), b = bootstrap_median_ci(v, 11);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.lo <= median(v));
  CHECK(a.hi >= median(v));
}
