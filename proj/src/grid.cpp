#include "lfpp/grid.hpp"

#include <cmath>
#include <string>

#include "lfpp/common.hpp"

namespace lfpp {

std::int64_t GridSpec::sites() const {
  std::int64_t s = 1;
  for (int a = 0; a < d; ++a) s *= n;
  return s;
}

void GridSpec::validate(std::int64_t max_sites) const {
  if (d < 2 || d > 3) throw ValidationError("grid dimension must be 2 or 3");
  if (n < 4 || (n & (n - 1)) != 0) throw ValidationError("n_per_axis must be a power of two >= 4");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("grid spacing must be positive");
  if (!periodic) throw ValidationError("only periodic grids are supported");
  if (sites() > max_sites)
    throw ResourceError("grid has " + std::to_string(sites()) + " sites, cap is " + std::to_string(max_sites));
}

GridSpec::Index GridSpec::unflatten(std::int64_t s) const {
  Index idx{0, 0, 0};
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(s % n);
    s /= n;
  }
  return idx;
}

std::int64_t GridSpec::flatten(const Index& idx) const {
  std::int64_t s = 0;
  for (int a = 0; a < d; ++a) s = s * n + idx[a];
  return s;
}

std::int64_t GridSpec::nearest_site(const Eigen::VectorXd& x) const {
  Index idx{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    long k = std::lround(x[a] / spacing) + n / 2;
    k %= n;
    if (k < 0) k += n;
    idx[a] = static_cast<int>(k);
  }
  return flatten(idx);
}

Eigen::VectorXd GridSpec::position(std::int64_t s) const {
  const Index idx = unflatten(s);
  Eigen::VectorXd x(d);
  for (int a = 0; a < d; ++a) x[a] = (idx[a] - n / 2) * spacing;
  return x;
}

Eigen::VectorXd GridSpec::displacement(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const double L = side();
  Eigen::VectorXd v = b - a;
  for (int k = 0; k < d; ++k) v[k] -= L * std::round(v[k] / L);
  return v;
}

bool GridSpec::inside(const Eigen::VectorXd& x) const {
  const double half = 0.5 * side();
  for (int a = 0; a < d; ++a)
    if (x[a] < -half || x[a] > half - spacing) return false;
  return true;
}

std::int64_t GridSpec::shifted(std::int64_t s, const Index& offset) const {
  Index idx = unflatten(s);
  for (int a = 0; a < d; ++a) idx[a] = ((idx[a] + offset[a]) % n + n) % n;
  return flatten(idx);
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  return a.d == b.d && a.n == b.n && a.spacing == b.spacing && a.periodic == b.periodic;
}

}  // namespace lfpp
