#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lfpp/field.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

struct CouplingParams {
  int d = 2;
  double gamma = 0.0;
  double xi = 0.0;
  double Q = 0.0;
  double d_gamma = 0.0;
  bool consistent = true;  // false: Q supplied by hand, relations not enforced

  static CouplingParams from_gamma_xi(int d, double gamma, double xi);
  // d = 2 only at the Brownian-map point xi = 1/sqrt(6), where gamma = sqrt(8/3) and d_gamma = 4.
  static CouplingParams from_xi(int d, double xi);
  // Free (xi, Q) pair, used for formula-limit checks.
  static CouplingParams free(int d, double xi, double Q);
  void validate() const;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct WeightGrid {
  GridSpec grid;
  Eigen::ArrayXd weights;
  double xi = 0.0;
  std::string source_field_id;
};

WeightGrid weight_grid(const FieldSample& field, double xi);
WeightGrid weight_grid(const FieldSample& field, const CouplingParams& params);

enum class Stencil { moore, von_neumann };

using SiteSet = std::vector<std::int64_t>;
using SiteMask = std::vector<std::uint8_t>;

enum class DistanceKind { point_point, point_set, set_set, across, around, internal };
std::string to_string(DistanceKind k);

struct DistanceResult {
  double value = kInfinity;
  DistanceKind kind = DistanceKind::point_point;
  std::optional<SiteSet> path;
  std::optional<std::string> domain_mask_id;
  bool disconnected() const { return value == kInfinity; }
};

struct DistanceOptions {
  Stencil stencil = Stencil::moore;
  bool want_path = false;
};

struct Neighbor {
  GridSpec::Index offset;
  double length;
};
std::vector<Neighbor> stencil_neighbors(const GridSpec& grid, Stencil st);

// Cost of the edge between neighbouring sites u and v at Euclidean length len.
inline double edge_cost(const WeightGrid& w, std::int64_t u, std::int64_t v, double len) {
  return len * 0.5 * (w.weights[u] + w.weights[v]);
}

// Multi-source Dijkstra over the periodic stencil graph, optionally restricted to a mask.
// Ties are broken by site index, so the predecessor tree is deterministic.
std::vector<double> shortest_paths(const WeightGrid& w, const SiteSet& src, const SiteMask* domain = nullptr,
                                   Stencil st = Stencil::moore, std::vector<std::int64_t>* pred = nullptr);

// Lowers dist[] with paths from one new source, expanding only where it improves.
// Returns the number of sites settled.
std::int64_t improve_distances(const WeightGrid& w, std::int64_t source, std::vector<double>& dist,
                               const SiteMask* domain = nullptr, Stencil st = Stencil::moore);

DistanceResult distance(const WeightGrid& w, const SiteSet& src, const SiteSet& dst, const SiteMask* domain = nullptr,
                        const DistanceOptions& opt = {});

// Distances from src to each target, stopping once every target is settled.
std::vector<double> distances_to(const WeightGrid& w, const SiteSet& src, const SiteSet& targets,
                                 const SiteMask* domain = nullptr, Stencil st = Stencil::moore);

// Site of a physical point; the point must lie inside the fundamental box.
std::int64_t site_of_point(const GridSpec& grid, const Eigen::VectorXd& x);

double path_cost(const WeightGrid& w, const SiteSet& path);

struct ShellSpec {
  Eigen::VectorXd center;
  double r_inner = 0.0;
  double r_outer = 0.0;
};

void validate_shell(const GridSpec& grid, const ShellSpec& shell);
// Sites within spacing/2 of the sphere of radius r.
SiteSet sphere_sites(const GridSpec& grid, const Eigen::VectorXd& center, double r);
// Closed shell including both boundary bands.
SiteMask shell_mask(const GridSpec& grid, const ShellSpec& shell);

DistanceResult across_distance(const WeightGrid& w, const ShellSpec& shell, Stencil st = Stencil::moore);

// Ray directions in a fixed nested order (first two antipodal), so a prefix is the n-ray family.
std::vector<Eigen::VectorXd> ray_directions(int d, int n);
SiteSet ray_sites(const GridSpec& grid, const ShellSpec& shell, const Eigen::VectorXd& dir);

struct AroundResult {
  DistanceResult result;
  std::vector<std::vector<double>> pairwise;  // internal distances between rays
};

AroundResult around_distance(const WeightGrid& w, const ShellSpec& shell, int n_rays, Stencil st = Stencil::moore);

struct MedianReport {
  double median = 0.0;
  Interval ci;
  int n = 0;
};

MedianReport median_distance(const std::vector<double>& samples, std::uint64_t seed, std::size_t min_size = 100);

}  // namespace lfpp
