#include <doctest.h>

#include <cmath>

#include "lfpp/common.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/pipeline.hpp"
#include "lfpp/rng.hpp"

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

WeightGrid random_grid(int d, int n, std::uint64_t seed) {
  GridSpec g;
  g.d = d;
  g.n = n;
  g.spacing = 1.0;
  WeightGrid w = flat(g);
  auto s = make_stream(seed, StreamPurpose::test_data, 0);
  for (std::int64_t i = 0; i < g.sites(); ++i) w.weights[i] = std::exp(2.0 * (s.uniform01() - 0.5));
  return w;
}

// Floyd-Warshall over the same edge costs as the oracle for small graphs.
std::vector<std::vector<double>> all_pairs(const WeightGrid& w, Stencil st) {
  const auto& g = w.grid;
  const auto n = g.sites();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInfinity));
  for (std::int64_t u = 0; u < n; ++u) {
    d[u][u] = 0.0;
    for (const auto& e : stencil_neighbors(g, st)) {
      const auto v = g.shifted(u, e.offset);
      d[u][v] = std::min(d[u][v], edge_cost(w, u, v, e.length));
    }
  }
  for (std::int64_t k = 0; k < n; ++k)
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

}  // namespace

TEST_CASE("flat metric is the stencil path length") {
  const auto g = grid(64, 4.0);
  const auto w = flat(g);
  const auto o = g.nearest_site(Eigen::Vector2d(0, 0));
  const auto e1 = g.nearest_site(Eigen::Vector2d(1, 0));
  const auto diag = g.nearest_site(Eigen::Vector2d(0.5, 0.5));
  CHECK(distance(w, {o}, {e1}).value == doctest::Approx(1.0));
  CHECK(distance(w, {o}, {diag}).value == doctest::Approx(std::sqrt(0.5)));
  CHECK(distance(w, {o}, {diag}, nullptr, {Stencil::von_neumann, false}).value == doctest::Approx(1.0));
}

TEST_CASE("dijkstra matches floyd-warshall on small random grids") {
  for (int t = 0; t < 6; ++t) {
    const auto w = random_grid(t % 2 ? 2 : 3, t % 2 ? 6 : 4, 100 + t);
    const Stencil st = t < 3 ? Stencil::moore : Stencil::von_neumann;
    const auto ref = all_pairs(w, st);
    for (std::int64_t s = 0; s < w.grid.sites(); s += 5) {
      const auto d = shortest_paths(w, {s}, nullptr, st);
      for (std::int64_t v = 0; v < w.grid.sites(); ++v) CHECK(d[v] == doctest::Approx(ref[s][v]).epsilon(1e-13));
    }
  }
}

TEST_CASE("paths, targeted distances and incremental updates agree") {
  const auto w = random_grid(2, 32, 7);
  const auto d = shortest_paths(w, {0});
  const auto r = distance(w, {0}, {555}, nullptr, {Stencil::moore, true});
  REQUIRE(r.path);
  CHECK(r.path->front() == 0);
  CHECK(r.path->back() == 555);
  CHECK(path_cost(w, *r.path) == doctest::Approx(r.value).epsilon(1e-13));
  CHECK(r.value == d[555]);
  const auto t = distances_to(w, {0}, {555, 17, 900});
  CHECK(t[0] == d[555]);
  CHECK(t[1] == d[17]);
  CHECK(t[2] == d[900]);
  std::vector<double> dist(w.grid.sites(), kInfinity);
  improve_distances(w, 0, dist);
  improve_distances(w, 600, dist);
  const auto d600 = shortest_paths(w, {600});
  for (std::int64_t v = 0; v < w.grid.sites(); ++v) CHECK(dist[v] == std::min(d[v], d600[v]));
}

TEST_CASE("weyl scaling and locality") {
  const auto g = grid(64, 4.0);
  const auto f = shared_mollifier(g, BumpKind::canonical, 0.25)->apply(sample_spectral_lgf(g, 2));
  const double xi = 0.4;
  auto shifted = f;
  shifted.values += 1.3;
  const auto a = shortest_paths(weight_grid(f, xi), {10});
  const auto b = shortest_paths(weight_grid(shifted, xi), {10});
  for (std::int64_t v = 0; v < g.sites(); v += 37) CHECK(b[v] == doctest::Approx(std::exp(xi * 1.3) * a[v]).epsilon(1e-12));

  const ShellSpec ball{Eigen::Vector2d::Zero(), 0.0, 1.0};
  const auto mask = shell_mask(g, ball);
  auto pert = f;
  for (std::int64_t s = 0; s < g.sites(); ++s)
    if (!mask[s]) pert.values[s] -= 20.0;
  const auto x = g.nearest_site(Eigen::Vector2d(-0.8, 0.0)), y = g.nearest_site(Eigen::Vector2d(0.8, 0.0));
  CHECK(distance(weight_grid(f, xi), {x}, {y}, &mask).value == distance(weight_grid(pert, xi), {x}, {y}, &mask).value);
  // without the mask the far perturbation does matter
  CHECK(distance(weight_grid(f, xi), {x}, {y}).value != distance(weight_grid(pert, xi), {x}, {y}).value);
}

TEST_CASE("shell distances on the flat metric") {
  const auto g = grid(128, 4.0);
  const auto w = flat(g);
  const ShellSpec shell{Eigen::Vector2d::Zero(), 0.5, 1.0};
  const auto across = across_distance(w, shell);
  CHECK(across.value == doctest::Approx(0.5).epsilon(0.1));
  const auto around = around_distance(w, shell, 8);
  // two antipodal rays: any connecting path inside the shell runs half way round at radius >= 0.5
  CHECK(around.result.value >= std::numbers::pi * 0.5 * 0.9);
  CHECK(ray_directions(2, 8)[0].dot(ray_directions(2, 8)[1]) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(validate_shell(g, ShellSpec{Eigen::Vector2d::Zero(), 1.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(site_of_point(g, Eigen::Vector2d(5.0, 0.0)), ValidationError);
}
