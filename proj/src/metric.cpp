#include "lfpp/metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <sstream>

#include "lfpp/common.hpp"

namespace lfpp {

CouplingParams CouplingParams::from_gamma_xi(int d, double gamma, double xi) {
  CouplingParams p;
  p.d = d;
  p.gamma = gamma;
  p.xi = xi;
  p.Q = d / gamma + gamma / 2.0;
  p.d_gamma = gamma / xi;
  p.validate();
  return p;
}

CouplingParams CouplingParams::from_xi(int d, double xi) {
  const double bm = 1.0 / std::sqrt(6.0);
  if (d == 2 && std::abs(xi - bm) < 1e-12) return from_gamma_xi(2, std::sqrt(8.0 / 3.0), bm);
  throw ValidationError("gamma is only determined by xi at d = 2, xi = 1/sqrt(6); give gamma explicitly");
}

CouplingParams CouplingParams::free(int d, double xi, double Q) {
  CouplingParams p;
  p.d = d;
  p.xi = xi;
  p.Q = Q;
  p.consistent = false;
  if (!(xi > 0.0) || !(Q > 0.0)) throw ValidationError("xi and Q must be positive");
  return p;
}

void CouplingParams::validate() const {
  if (d < 2) throw ValidationError("dimension must be at least 2");
  if (!(xi > 0.0)) throw ValidationError("xi must be positive");
  if (!consistent) return;
  const double top = std::sqrt(2.0 * d);
  if (!(gamma > 0.0) || !(gamma < top)) throw ValidationError("gamma must lie in (0, sqrt(2d))");
  if (std::abs(Q - (d / gamma + gamma / 2.0)) > 1e-12) throw ValidationError("Q inconsistent with gamma");
  if (std::abs(xi * d_gamma - gamma) > 1e-12) throw ValidationError("xi * d_gamma differs from gamma");
  if (!(Q > top)) throw ValidationError("Q must exceed sqrt(2d)");
}

WeightGrid weight_grid(const FieldSample& field, double xi) {
  if (!(field.epsilon > 0.0)) throw ValidationError("weight grid needs a mollified field (epsilon > 0)");
  std::vector<std::int64_t> bad;
  for (Eigen::Index s = 0; s < field.values.size(); ++s)
    if (!(std::abs(xi * field.values[s]) <= 700.0)) bad.push_back(s);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "exp(xi h) overflow at " << bad.size() << " sites:";
    for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 10); ++i) os << ' ' << bad[i];
    throw ValidationError(os.str());
  }
  WeightGrid w;
  w.grid = field.grid;
  w.weights = (xi * field.values).exp();
  w.xi = xi;
  w.source_field_id = to_string(field.sampler) + ":" + std::to_string(field.seed);
  return w;
}

WeightGrid weight_grid(const FieldSample& field, const CouplingParams& params) {
  return weight_grid(field, params.xi);
}

std::string to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::point_point: return "point_point";
    case DistanceKind::point_set: return "point_set";
    case DistanceKind::set_set: return "set_set";
    case DistanceKind::across: return "across";
    case DistanceKind::around: return "around";
    case DistanceKind::internal: return "internal";
  }
  return "unknown";
}

std::vector<Neighbor> stencil_neighbors(const GridSpec& grid, Stencil st) {
  std::vector<Neighbor> out;
  const int d = grid.d;
  const int total = d == 2 ? 9 : 27;
  for (int c = 0; c < total; ++c) {
    GridSpec::Index off{0, 0, 0};
    int cc = c, nonzero = 0;
    for (int a = 0; a < d; ++a) {
      off[a] = cc % 3 - 1;
      cc /= 3;
      nonzero += off[a] != 0;
    }
    if (nonzero == 0) continue;
    if (st == Stencil::von_neumann && nonzero != 1) continue;
    out.push_back({off, grid.spacing * std::sqrt(static_cast<double>(nonzero))});
  }
  return out;
}

namespace {

using HeapItem = std::pair<double, std::int64_t>;
using MinHeap = std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>>;

struct Walker {
  const WeightGrid& w;
  std::vector<Neighbor> nb;
  const SiteMask* domain;

  Walker(const WeightGrid& wg, Stencil st, const SiteMask* dom) : w(wg), nb(stencil_neighbors(wg.grid, st)), domain(dom) {}

  bool allowed(std::int64_t s) const { return !domain || (*domain)[s]; }

  template <class F>
  void for_neighbors(std::int64_t u, F&& f) const {
    const GridSpec& g = w.grid;
    const GridSpec::Index idx = g.unflatten(u);
    const int n = g.n;
    for (const auto& e : nb) {
      std::int64_t v = 0;
      for (int a = 0; a < g.d; ++a) {
        int k = idx[a] + e.offset[a];
        k = k < 0 ? k + n : (k >= n ? k - n : k);
        v = v * n + k;
      }
      if (allowed(v)) f(v, edge_cost(w, u, v, e.length));
    }
  }
};

void check_sites(const GridSpec& g, const SiteSet& s, const SiteMask* domain, const char* what) {
  if (s.empty()) throw ValidationError(std::string(what) + " site set is empty");
  for (auto x : s) {
    if (x < 0 || x >= g.sites()) throw ValidationError(std::string(what) + " site outside the grid");
    if (domain && !(*domain)[x]) throw ValidationError(std::string(what) + " site outside the domain mask");
  }
}

}  // namespace

std::vector<double> shortest_paths(const WeightGrid& w, const SiteSet& src, const SiteMask* domain, Stencil st,
                                   std::vector<std::int64_t>* pred) {
  check_sites(w.grid, src, domain, "source");
  Walker walk(w, st, domain);
  std::vector<double> dist(w.grid.sites(), kInfinity);
  if (pred) pred->assign(w.grid.sites(), -1);
  MinHeap heap;
  for (auto s : src) {
    dist[s] = 0.0;
    heap.push({0.0, s});
  }
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    walk.for_neighbors(u, [&](std::int64_t v, double c) {
      const double nd = du + c;
      if (nd < dist[v]) {
        dist[v] = nd;
        if (pred) (*pred)[v] = u;
        heap.push({nd, v});
      }
    });
  }
  return dist;
}

std::int64_t improve_distances(const WeightGrid& w, std::int64_t source, std::vector<double>& dist,
                               const SiteMask* domain, Stencil st) {
  check_sites(w.grid, {source}, domain, "source");
  Walker walk(w, st, domain);
  MinHeap heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  std::int64_t settled = 0;
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    ++settled;
    walk.for_neighbors(u, [&](std::int64_t v, double c) {
      const double nd = du + c;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.push({nd, v});
      }
    });
  }
  return settled;
}

DistanceResult distance(const WeightGrid& w, const SiteSet& src, const SiteSet& dst, const SiteMask* domain,
                        const DistanceOptions& opt) {
  const GridSpec& g = w.grid;
  check_sites(g, src, domain, "source");
  check_sites(g, dst, domain, "target");
  DistanceResult res;
  res.kind = src.size() == 1 && dst.size() == 1   ? DistanceKind::point_point
             : src.size() == 1 || dst.size() == 1 ? DistanceKind::point_set
                                                  : DistanceKind::set_set;
  if (domain) res.kind = DistanceKind::internal;

  std::vector<std::uint8_t> is_dst(g.sites(), 0);
  for (auto s : dst) is_dst[s] = 1;
  Walker walk(w, opt.stencil, domain);
  std::vector<double> dist(g.sites(), kInfinity);
  std::vector<std::int64_t> pred(opt.want_path ? g.sites() : 0, -1);
  MinHeap heap;
  for (auto s : src) {
    dist[s] = 0.0;
    heap.push({0.0, s});
  }
  std::int64_t hit = -1;
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    if (is_dst[u]) {
      hit = u;
      break;
    }
    walk.for_neighbors(u, [&](std::int64_t v, double c) {
      const double nd = du + c;
      if (nd < dist[v]) {
        dist[v] = nd;
        if (opt.want_path) pred[v] = u;
        heap.push({nd, v});
      }
    });
  }
  if (hit < 0) return res;
  res.value = dist[hit];
  if (opt.want_path) {
    SiteSet path;
    for (std::int64_t s = hit; s >= 0; s = pred[s]) path.push_back(s);
    std::reverse(path.begin(), path.end());
    res.path = std::move(path);
  }
  return res;
}

std::vector<double> distances_to(const WeightGrid& w, const SiteSet& src, const SiteSet& targets,
                                 const SiteMask* domain, Stencil st) {
  const GridSpec& g = w.grid;
  check_sites(g, src, domain, "source");
  check_sites(g, targets, domain, "target");
  std::vector<std::uint8_t> pending(g.sites(), 0);
  std::size_t left = 0;
  for (auto t : targets)
    if (!pending[t]) {
      pending[t] = 1;
      ++left;
    }
  Walker walk(w, st, domain);
  std::vector<double> dist(g.sites(), kInfinity);
  MinHeap heap;
  for (auto s : src) {
    dist[s] = 0.0;
    heap.push({0.0, s});
  }
  while (!heap.empty() && left > 0) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    if (pending[u]) {
      pending[u] = 0;
      --left;
    }
    walk.for_neighbors(u, [&](std::int64_t v, double c) {
      const double nd = du + c;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.push({nd, v});
      }
    });
  }
  std::vector<double> out;
  out.reserve(targets.size());
  for (auto t : targets) out.push_back(dist[t]);
  return out;
}

std::int64_t site_of_point(const GridSpec& grid, const Eigen::VectorXd& x) {
  if (x.size() != grid.d) throw ValidationError("point has wrong dimension");
  if (!grid.inside(x)) throw ValidationError("point lies outside the grid box");
  return grid.nearest_site(x);
}

double path_cost(const WeightGrid& w, const SiteSet& path) {
  const GridSpec& g = w.grid;
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto a = g.unflatten(path[i - 1]), b = g.unflatten(path[i]);
    int nonzero = 0;
    for (int k = 0; k < g.d; ++k) {
      int diff = ((b[k] - a[k]) % g.n + g.n) % g.n;
      if (diff == g.n - 1) diff = -1;
      if (diff > 1 || diff < -1) throw ValidationError("path steps between non-neighbouring sites");
      nonzero += diff != 0;
    }
    total += edge_cost(w, path[i - 1], path[i], g.spacing * std::sqrt(static_cast<double>(nonzero)));
  }
  return total;
}

void validate_shell(const GridSpec& grid, const ShellSpec& shell) {
  if (shell.center.size() != grid.d) throw ValidationError("shell center has wrong dimension");
  if (!(shell.r_inner > 0.0) || !(shell.r_outer > shell.r_inner)) throw ValidationError("shell needs 0 < r_inner < r_outer");
  if (shell.r_outer - shell.r_inner < 3.0 * grid.spacing)
    throw ResolutionError("shell gap is below three grid spacings");
  if (shell.center.cwiseAbs().maxCoeff() + shell.r_outer + grid.spacing > 0.5 * grid.side())
    throw ValidationError("shell does not fit in the box");
}

namespace {

template <class F>
void for_sites_in_box(const GridSpec& g, const Eigen::VectorXd& c, double reach, F&& f) {
  GridSpec::Index lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < g.d; ++a) {
    lo[a] = static_cast<int>(std::floor((c[a] - reach) / g.spacing));
    hi[a] = static_cast<int>(std::ceil((c[a] + reach) / g.spacing));
  }
  Eigen::VectorXd x(g.d);
  GridSpec::Index k{0, 0, 0};
  for (k[0] = lo[0]; k[0] <= hi[0]; ++k[0])
    for (k[1] = lo[1]; k[1] <= hi[1]; ++k[1])
      for (k[2] = g.d == 3 ? lo[2] : 0; k[2] <= (g.d == 3 ? hi[2] : 0); ++k[2]) {
        for (int a = 0; a < g.d; ++a) x[a] = k[a] * g.spacing;
        f(x, g.nearest_site(x));
      }
}

}  // namespace

SiteSet sphere_sites(const GridSpec& grid, const Eigen::VectorXd& center, double r) {
  SiteSet out;
  const double h = grid.spacing;
  for_sites_in_box(grid, center, r + h, [&](const Eigen::VectorXd& x, std::int64_t s) {
    if (std::abs((x - center).norm() - r) <= 0.5 * h) out.push_back(s);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw ResolutionError("sphere has no sites at this resolution");
  return out;
}

SiteMask shell_mask(const GridSpec& grid, const ShellSpec& shell) {
  SiteMask m(grid.sites(), 0);
  const double h = grid.spacing;
  for_sites_in_box(grid, shell.center, shell.r_outer + h, [&](const Eigen::VectorXd& x, std::int64_t s) {
    const double r = (x - shell.center).norm();
    if (r >= shell.r_inner - 0.5 * h && r <= shell.r_outer + 0.5 * h) m[s] = 1;
  });
  return m;
}

DistanceResult across_distance(const WeightGrid& w, const ShellSpec& shell, Stencil st) {
  validate_shell(w.grid, shell);
  const SiteMask mask = shell_mask(w.grid, shell);
  auto res = distance(w, sphere_sites(w.grid, shell.center, shell.r_inner),
                      sphere_sites(w.grid, shell.center, shell.r_outer), &mask, {st, false});
  res.kind = DistanceKind::across;
  res.domain_mask_id = "shell";
  return res;
}

namespace {

double radical_inverse(std::uint32_t k, std::uint32_t base) {
  double inv = 1.0 / base, f = inv, out = 0.0;
  while (k) {
    out += f * (k % base);
    k /= base;
    f *= inv;
  }
  return out;
}

}  // namespace

std::vector<Eigen::VectorXd> ray_directions(int d, int n) {
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd v(d);
    if (d == 2) {
      const double th = 2.0 * std::numbers::pi * radical_inverse(k, 2);
      v << std::cos(th), std::sin(th);
    } else if (k < 2) {
      v << 0.0, 0.0, k == 0 ? 1.0 : -1.0;
    } else {
      const double z = 1.0 - 2.0 * radical_inverse(k - 1, 2);
      const double th = 2.0 * std::numbers::pi * radical_inverse(k - 1, 3);
      const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
      v << rr * std::cos(th), rr * std::sin(th), z;
    }
    out.push_back(v);
  }
  return out;
}

SiteSet ray_sites(const GridSpec& grid, const ShellSpec& shell, const Eigen::VectorXd& dir) {
  const double h = grid.spacing;
  const Eigen::VectorXd far = shell.center + (shell.r_outer + 0.5 * h) * dir;
  if (!grid.inside(far)) throw ValidationError("ray exits the grid");
  SiteSet out;
  for (double t = shell.r_inner - 0.5 * h; t <= shell.r_outer + 0.5 * h; t += 0.25 * h) {
    const std::int64_t s = grid.nearest_site(shell.center + t * dir);
    if (out.empty() || out.back() != s) out.push_back(s);
  }
  return out;
}

AroundResult around_distance(const WeightGrid& w, const ShellSpec& shell, int n_rays, Stencil st) {
  if (n_rays < 2) throw ValidationError("around distance needs at least two rays");
  validate_shell(w.grid, shell);
  SiteMask mask = shell_mask(w.grid, shell);
  const auto dirs = ray_directions(w.grid.d, n_rays);
  std::vector<SiteSet> rays;
  for (const auto& v : dirs) {
    SiteSet r = ray_sites(w.grid, shell, v);
    // Snapped ray sites may sit just outside the closed shell band; they belong to the path.
    for (auto s : r) mask[s] = 1;
    rays.push_back(std::move(r));
  }
  AroundResult out;
  out.pairwise.assign(n_rays, std::vector<double>(n_rays, 0.0));
  double best = 0.0;
  for (int i = 0; i < n_rays; ++i) {
    const auto dist = shortest_paths(w, rays[i], &mask, st);
    for (int j = i + 1; j < n_rays; ++j) {
      double m = kInfinity;
      for (auto s : rays[j]) m = std::min(m, dist[s]);
      out.pairwise[i][j] = out.pairwise[j][i] = m;
      best = std::max(best, m);
    }
  }
  out.result.value = best;
  out.result.kind = DistanceKind::around;
  out.result.domain_mask_id = "shell";
  return out;
}

MedianReport median_distance(const std::vector<double>& samples, std::uint64_t seed, std::size_t min_size) {
  if (samples.size() < min_size)
    throw ValidationError("median needs at least " + std::to_string(min_size) + " samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw ValidationError("infinite distance in ensemble");
  MedianReport r;
  r.median = median(samples);
  r.ci = bootstrap_median_ci(samples, seed);
  r.n = static_cast<int>(samples.size());
  return r;
}

}  // namespace lfpp
