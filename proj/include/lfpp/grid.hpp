#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

namespace lfpp {

// Periodic grid on the torus [-L/2, L/2)^d, row-major site order. Site multi-index i maps to
// position (i - n/2) * spacing, so the origin is a site.
struct GridSpec {
  int d = 2;
  int n = 256;
  double spacing = 1.0 / 64;
  bool periodic = true;

  double side() const { return n * spacing; }
  std::int64_t sites() const;
  void validate(std::int64_t max_sites = kDefaultMaxSites) const;

  using Index = std::array<int, 3>;
  Index unflatten(std::int64_t s) const;
  std::int64_t flatten(const Index& idx) const;
  // Nearest site to a physical point (wrapped onto the torus).
  std::int64_t nearest_site(const Eigen::VectorXd& x) const;
  Eigen::VectorXd position(std::int64_t s) const;
  // Minimum-image displacement from a to b.
  Eigen::VectorXd displacement(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  // Whether a point lies in the fundamental box without wrapping.
  bool inside(const Eigen::VectorXd& x) const;
  // Cyclic shift of a site by an integer offset.
  std::int64_t shifted(std::int64_t s, const Index& offset) const;

  static constexpr std::int64_t kDefaultMaxSites = std::int64_t{1} << 24;
};

bool operator==(const GridSpec& a, const GridSpec& b);

}  // namespace lfpp
