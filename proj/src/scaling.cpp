#include "lfpp/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfpp/common.hpp"
#include "lfpp/rng.hpp"
#include "lfpp/stats.hpp"

namespace lfpp {

namespace {

Eigen::VectorXd axis_point(int d, double x1) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
  p[0] = x1;
  return p;
}

WeightGrid metric_weights(const FieldSample& field, const MetricSetup& setup) {
  auto moll = shared_mollifier(field.grid, setup.bump, setup.epsilon);
  return weight_grid(moll->apply(field), setup.params);
}

double max_over_min(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

}  // namespace

// ---- distance exponent

ExponentFit fit_distance_exponent(const std::vector<std::pair<double, double>>& medians,
                                  std::optional<CouplingParams> params) {
  if (medians.size() < 4) throw ValidationError("exponent fit needs at least 4 epsilon values");
  ExponentFit fit;
  double lo = kInfinity, hi = 0.0;
  for (const auto& [eps, a] : medians) {
    if (!(eps > 0.0) || !(a > 0.0) || !std::isfinite(a))
      throw ValidationError("exponent fit needs positive epsilons and finite positive medians");
    fit.x_values.push_back(std::log(eps));
    fit.y_values.push_back(std::log(a));
    lo = std::min(lo, eps);
    hi = std::max(hi, eps);
  }
  if (hi / lo < 8.0) throw ValidationError("epsilon values must span at least a factor 8");
  const auto lf = fit_line(Eigen::Map<const Eigen::VectorXd>(fit.x_values.data(), fit.x_values.size()),
                           Eigen::Map<const Eigen::VectorXd>(fit.y_values.data(), fit.y_values.size()));
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.stderr_slope = lf.stderr_slope;
  fit.r_squared = lf.r_squared;
  fit.implied_xi_q = 1.0 - lf.slope;
  if (params) fit.target_xi_q = params->xi * params->Q;
  return fit;
}

MedianSeries distance_medians(const EnsembleSpec& ens, const MetricSetup& setup, const std::vector<double>& epsilons,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  ens.validate(100);
  const std::int64_t sx = site_of_point(ens.grid, x), sy = site_of_point(ens.grid, y);
  std::vector<std::shared_ptr<const Mollifier>> moll;
  for (double e : epsilons) moll.push_back(shared_mollifier(ens.grid, setup.bump, e));
  const DistanceOptions opt{setup.stencil, false};
  auto rows = parallel_map<std::vector<double>>(ens.size, [&](std::size_t i) {
    const FieldSample field = ensemble_field(ens, static_cast<int>(i));
    std::vector<double> out;
    for (const auto& m : moll) out.push_back(distance(weight_grid(m->apply(field), setup.params), {sx}, {sy}, nullptr, opt).value);
    return out;
  });
  MedianSeries s;
  s.epsilons = epsilons;
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r[k]);
    s.medians.push_back(median_distance(col, ens.base_seed + 7919 * k));
    s.samples.push_back(std::move(col));
  }
  return s;
}

// ---- c_r scaling

CrSample c_r_sample(const FieldSample& field, const MetricSetup& setup, const std::vector<double>& r_list,
                    const Eigen::VectorXd& x0, const Eigen::VectorXd& y0) {
  const WeightGrid w = metric_weights(field, setup);
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(field.grid.d);
  CrSample s;
  for (double r : r_list) {
    if (r < 4.0 * setup.epsilon) throw ResolutionError("scale r = " + std::to_string(r) + " too close to epsilon");
    const auto a = site_of_point(field.grid, r * x0), b = site_of_point(field.grid, r * y0);
    s.distance.push_back(distance(w, {a}, {b}, nullptr, {setup.stencil, false}).value);
    s.h_r.push_back(sphere_average(field, origin, r));
  }
  return s;
}

double normalized_c_r(const CrSample& s, std::size_t k, double r, double xi, double xi_q) {
  return std::pow(r, -xi_q) * std::exp(-xi * s.h_r[k]) * s.distance[k];
}

CrReport c_r_report(const std::vector<CrSample>& samples, const std::vector<double>& r_list, double xi, double xi_q,
                    double control_offset) {
  CrReport rep;
  rep.r_list = r_list;
  rep.xi_q = xi_q;
  rep.control_xi_q = xi_q + control_offset;
  for (std::size_t k = 0; k < r_list.size(); ++k) {
    std::vector<double> v, c;
    for (const auto& s : samples) {
      v.push_back(normalized_c_r(s, k, r_list[k], xi, rep.xi_q));
      c.push_back(normalized_c_r(s, k, r_list[k], xi, rep.control_xi_q));
    }
    rep.medians.push_back(median(v));
    rep.control_medians.push_back(median(c));
  }
  rep.spread = max_over_min(rep.medians);
  rep.control_spread = max_over_min(rep.control_medians);
  rep.samples = samples;
  return rep;
}

CrReport check_c_r_scaling(const EnsembleSpec& ens, const MetricSetup& setup, const std::vector<double>& r_list,
                           double control_offset) {
  ens.validate(2);
  for (double r : r_list) {
    const double l = std::log2(r);
    if (r > 1.0 || std::abs(l - std::round(l)) > 1e-12) throw ValidationError("r_list entries must be powers of 1/2");
  }
  const int d = ens.grid.d;
  const Eigen::VectorXd x0 = axis_point(d, -0.5), y0 = axis_point(d, 0.5);
  auto samples = parallel_map<CrSample>(ens.size, [&](std::size_t i) {
    return c_r_sample(ensemble_field(ens, static_cast<int>(i)), setup, r_list, x0, y0);
  });
  return c_r_report(samples, r_list, setup.params.xi, setup.params.xi * setup.params.Q, control_offset);
}

// ---- moments

MomentKind parse_moment_kind(const std::string& s) {
  if (s == "point_point") return MomentKind::point_point;
  if (s == "set_set") return MomentKind::set_set;
  if (s == "diameter") return MomentKind::diameter;
  throw ValidationError("unknown moment kind '" + s + "'");
}

std::string to_string(MomentKind k) {
  switch (k) {
    case MomentKind::point_point: return "point_point";
    case MomentKind::set_set: return "set_set";
    case MomentKind::diameter: return "diameter";
  }
  return "unknown";
}

MomentReport moment_tail_report(const std::vector<double>& samples, const std::vector<double>& p_list,
                                const std::vector<double>& multipliers, double power_reference) {
  if (samples.size() < 4) throw ValidationError("moment report needs samples");
  MomentReport rep;
  rep.n = static_cast<int>(samples.size());
  rep.median = median(samples);
  rep.p_list = p_list;
  rep.power_reference = power_reference;
  const std::size_t half = samples.size() / 2;
  for (double p : p_list) {
    std::vector<double> pw, ph;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      pw.push_back(std::pow(samples[i], p));
      if (i < half) ph.push_back(pw.back());
    }
    const auto e = mean_estimate(pw);
    rep.moments.push_back(e.value);
    rep.moment_stderr.push_back(e.stderr_);
    rep.half_moments.push_back(mean(ph));
    rep.stability_ratio.push_back(e.value / rep.half_moments.back());
  }
  std::vector<double> lx, ly;
  for (double a : multipliers) {
    const double t = a * rep.median;
    const auto hits = std::count_if(samples.begin(), samples.end(), [&](double v) { return v > t; });
    rep.thresholds.push_back(t);
    rep.exceedances.push_back(hits);
    rep.survival.push_back(static_cast<double>(hits) / rep.n);
    rep.survival_ci.push_back(wilson_interval(hits, rep.n));
    if (hits > 0) {
      lx.push_back(std::log(a));
      ly.push_back(std::log(rep.survival.back()));
    }
  }
  rep.widened_uncertainty = rep.exceedances.empty() || rep.exceedances.back() < 20;
  if (lx.size() >= 2) {
    rep.tail_slope = fit_line(Eigen::Map<Eigen::VectorXd>(lx.data(), lx.size()),
                              Eigen::Map<Eigen::VectorXd>(ly.data(), ly.size()))
                         .slope;
    rep.faster_than_power = *rep.tail_slope < -power_reference;
  }
  return rep;
}

std::vector<double> moment_samples(const EnsembleSpec& ens, const MetricSetup& setup, MomentKind kind) {
  ens.validate(2);
  const GridSpec& g = ens.grid;
  const int d = g.d;
  if (d != 2 && kind != MomentKind::point_point) throw ValidationError("set and diameter queries are set up for d = 2");
  SiteSet a, b;
  std::vector<std::int64_t> marks;
  switch (kind) {
    case MomentKind::point_point:
      a = {site_of_point(g, axis_point(d, -0.5))};
      b = {site_of_point(g, axis_point(d, 0.5))};
      break;
    case MomentKind::set_set: {
      // two parallel segments {x = -1/2} and {x = 1/2}, |y| <= 1/4
      const int half = static_cast<int>(std::lround(0.25 / g.spacing));
      const auto s0 = site_of_point(g, axis_point(d, -0.5)), s1 = site_of_point(g, axis_point(d, 0.5));
      for (int k = -half; k <= half; ++k) {
        a.push_back(g.shifted(s0, {0, k, 0}));
        b.push_back(g.shifted(s1, {0, k, 0}));
      }
      break;
    }
    case MomentKind::diameter:
      // corners and edge midpoints of [-1/2, 1/2]^2; max pairwise distance bounds the diameter from below
      for (double x : {-0.5, 0.0, 0.5})
        for (double y : {-0.5, 0.0, 0.5}) {
          if (x == 0.0 && y == 0.0) continue;
          Eigen::VectorXd p(2);
          p << x, y;
          marks.push_back(site_of_point(g, p));
        }
      break;
  }
  auto raw = parallel_map<double>(ens.size, [&](std::size_t i) {
    const WeightGrid w = metric_weights(ensemble_field(ens, static_cast<int>(i)), setup);
    if (kind != MomentKind::diameter) return distance(w, a, b, nullptr, {setup.stencil, false}).value;
    double best = 0.0;
    for (std::size_t j = 0; j + 1 < marks.size(); ++j) {
      const SiteSet rest(marks.begin() + j + 1, marks.end());
      for (double v : distances_to(w, {marks[j]}, rest, nullptr, setup.stencil)) best = std::max(best, v);
    }
    return best;
  });
  const double m = median(raw);
  for (auto& v : raw) v /= m;
  return raw;
}

// ---- Holder

HolderReport holder_from_distances(const std::vector<std::vector<double>>& distances, const std::vector<double>& scales,
                                   const CouplingParams& params) {
  if (scales.size() < 3) throw ValidationError("Holder fit needs at least 3 separation scales");
  if (distances.size() < 100) throw ValidationError("Holder fit needs at least 100 pairs per scale");
  HolderReport rep;
  rep.scales = scales;
  Eigen::VectorXd x(scales.size()), y(scales.size());
  for (std::size_t k = 0; k < scales.size(); ++k) x[k] = std::log(scales[k]);
  for (const auto& row : distances) {
    for (std::size_t k = 0; k < scales.size(); ++k) y[k] = std::log(row[k]);
    rep.exponents.push_back(fit_line(x, y).slope);
  }
  rep.min = *std::min_element(rep.exponents.begin(), rep.exponents.end());
  rep.max = *std::max_element(rep.exponents.begin(), rep.exponents.end());
  rep.median = median(rep.exponents);
  const double s = std::sqrt(2.0 * params.d);
  rep.band_lo = params.xi * (params.Q - s);
  rep.band_hi = params.xi * (params.Q + s);
  rep.median_in_band = rep.median > rep.band_lo && rep.median < rep.band_hi;
  return rep;
}

std::vector<std::vector<double>> holder_distances(const WeightGrid& w, const std::vector<double>& scales, int n_pairs,
                                                  std::uint64_t seed, Stencil st) {
  const GridSpec& g = w.grid;
  std::vector<int> steps;
  for (double s : scales) {
    const double k = s / g.spacing;
    if (std::abs(k - std::round(k)) > 1e-9 || k < 1.0) throw ValidationError("Holder scales must be multiples of the spacing");
    steps.push_back(static_cast<int>(std::lround(k)));
  }
  std::vector<std::vector<double>> out;
  for (int j = 0; j < n_pairs; ++j) {
    auto rng = make_stream(seed, StreamPurpose::centers, static_cast<std::uint32_t>(j));
    Eigen::VectorXd p(g.d);
    for (int a = 0; a < g.d; ++a) p[a] = (rng.uniform01() - 0.5) * g.side() / 4.0;
    const auto base = g.nearest_site(p);
    const int axis = j % g.d;
    const int sign = rng.uniform01() < 0.5 ? -1 : 1;
    SiteSet targets;
    for (int k : steps) {
      GridSpec::Index off{0, 0, 0};
      off[axis] = sign * k;
      targets.push_back(g.shifted(base, off));
    }
    out.push_back(distances_to(w, {base}, targets, nullptr, st));
  }
  return out;
}

HolderReport holder_exponent_estimate(const EnsembleSpec& ens, const MetricSetup& setup, const std::vector<double>& scales,
                                      int pairs_per_seed) {
  ens.validate(1);
  if (static_cast<std::int64_t>(ens.size) * pairs_per_seed < 100)
    throw ValidationError("Holder fit needs at least 100 pairs per scale");
  auto per = parallel_map<std::vector<std::vector<double>>>(ens.size, [&](std::size_t i) {
    const WeightGrid w = metric_weights(ensemble_field(ens, static_cast<int>(i)), setup);
    return holder_distances(w, scales, pairs_per_seed, ens.seed(static_cast<int>(i)), setup.stencil);
  });
  std::vector<std::vector<double>> all;
  for (auto& p : per) all.insert(all.end(), p.begin(), p.end());
  return holder_from_distances(all, scales, setup.params);
}

// ---- thick points

bool is_thick(double h_delta, double delta, double alpha, double u) {
  const double L = std::log(1.0 / delta);
  return std::abs(h_delta - alpha * L) <= u * std::sqrt(L);
}

std::vector<double> thick_box_sizes(const GridSpec& grid, double epsilon_probe) {
  if (epsilon_probe < 4.0 * grid.spacing - 1e-12) throw ResolutionError("epsilon_probe must be at least 4 grid spacings");
  const double b = epsilon_probe / grid.spacing;
  const double lb = std::log2(b);
  if (std::abs(b - std::round(b)) > 1e-9 || std::abs(lb - std::round(lb)) > 1e-9)
    throw ValidationError("epsilon_probe must be a power-of-two multiple of the spacing");
  std::vector<double> sizes;
  for (double s = epsilon_probe; s <= 0.3 && s < grid.side() / 2; s *= 2.0) sizes.push_back(s);
  if (sizes.size() < 4) throw ValidationError("need at least 4 dyadic box sizes below 0.3; lower epsilon_probe");
  return sizes;
}

std::vector<std::int64_t> thick_box_counts(const FieldSample& field, double alpha, const std::vector<double>& sizes,
                                           double u) {
  const GridSpec& g = field.grid;
  std::vector<std::int64_t> counts;
  for (double s : sizes) {
    const FieldSample avg = sphere_average_field(field, s);
    const int b = static_cast<int>(std::lround(s / g.spacing));
    const int per_axis = g.n / b;
    std::int64_t boxes = 1, hits = 0;
    for (int a = 0; a < g.d; ++a) boxes *= per_axis;
    for (std::int64_t k = 0; k < boxes; ++k) {
      GridSpec::Index idx{0, 0, 0};
      std::int64_t rem = k;
      for (int a = g.d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rem % per_axis) * b + b / 2;
        rem /= per_axis;
      }
      hits += is_thick(avg.values[g.flatten(idx)], s, alpha, u);
    }
    counts.push_back(hits);
  }
  return counts;
}

namespace {

void fit_thick(ThickPointReport& rep, int d) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < rep.box_sizes.size(); ++k)
    if (rep.box_counts[k] > 0) {
      x.push_back(std::log(1.0 / rep.box_sizes[k]));
      y.push_back(std::log(static_cast<double>(rep.box_counts[k])));
    }
  for (std::size_t k = 1; k < rep.box_counts.size(); ++k)
    rep.counts_monotone = rep.counts_monotone && rep.box_counts[k] <= rep.box_counts[k - 1];
  if (x.size() < 2) {
    rep.empty = true;
    rep.fitted_dimension = 0.0;
    return;
  }
  const auto lf = fit_line(Eigen::Map<Eigen::VectorXd>(x.data(), x.size()), Eigen::Map<Eigen::VectorXd>(y.data(), y.size()));
  rep.fitted_dimension = std::clamp(lf.slope, 0.0, static_cast<double>(d));
  rep.stderr_dimension = lf.stderr_slope;
}

SiteSet thick_mask(const FieldSample& field, double alpha, double eps, double u) {
  const FieldSample avg = sphere_average_field(field, eps);
  SiteSet mask;
  for (std::int64_t s = 0; s < avg.values.size(); ++s)
    if (is_thick(avg.values[s], eps, alpha, u)) mask.push_back(s);
  return mask;
}

}  // namespace

ThickPointReport thick_points(const FieldSample& field, double alpha, double epsilon_probe, std::optional<double> u) {
  ThickPointReport rep;
  rep.alpha = alpha;
  rep.epsilon_probe = epsilon_probe;
  rep.window_u = u.value_or(default_window(field.grid.d));
  rep.box_sizes = thick_box_sizes(field.grid, epsilon_probe);
  rep.mask = thick_mask(field, alpha, epsilon_probe, rep.window_u);
  rep.box_counts = thick_box_counts(field, alpha, rep.box_sizes, rep.window_u);
  fit_thick(rep, field.grid.d);
  return rep;
}

ThickPointReport thick_points_ensemble(const EnsembleSpec& ens, double alpha, double epsilon_probe,
                                       std::optional<double> u) {
  ens.validate(1);
  ThickPointReport rep;
  rep.alpha = alpha;
  rep.epsilon_probe = epsilon_probe;
  rep.window_u = u.value_or(default_window(ens.grid.d));
  rep.box_sizes = thick_box_sizes(ens.grid, epsilon_probe);
  rep.members = ens.size;
  auto per = parallel_map<std::vector<std::int64_t>>(ens.size, [&](std::size_t i) {
    return thick_box_counts(ensemble_field(ens, static_cast<int>(i)), alpha, rep.box_sizes, rep.window_u);
  });
  rep.box_counts.assign(rep.box_sizes.size(), 0);
  for (const auto& c : per)
    for (std::size_t k = 0; k < c.size(); ++k) rep.box_counts[k] += c[k];
  rep.mask = thick_mask(ensemble_field(ens, 0), alpha, epsilon_probe, rep.window_u);
  fit_thick(rep, ens.grid.d);
  return rep;
}

double predicted_thick_dimension(int d, double alpha) { return std::max(d - alpha * alpha / 2.0, 0.0); }

// ---- KPZ

TargetKind parse_target_kind(const std::string& s) {
  if (s == "box") return TargetKind::box;
  if (s == "segment") return TargetKind::segment;
  if (s == "cantor") return TargetKind::cantor;
  throw ValidationError("unknown target '" + s + "'");
}

std::string to_string(TargetKind k) {
  switch (k) {
    case TargetKind::box: return "box";
    case TargetKind::segment: return "segment";
    case TargetKind::cantor: return "cantor";
  }
  return "unknown";
}

namespace {

bool in_cantor(double u, int levels) {
  for (int k = 0; k < levels; ++k) {
    u *= 3.0;
    const int digit = static_cast<int>(std::floor(u));
    if (digit == 1) return false;
    u -= digit;
  }
  return true;
}

}  // namespace

SiteSet target_sites(const GridSpec& grid, TargetKind kind) {
  if (grid.side() < 2.0) throw ValidationError("targets need a box side of at least 2");
  SiteSet out;
  const int levels = static_cast<int>(std::floor(std::log(1.0 / grid.spacing) / std::log(3.0)));
  for (std::int64_t s = 0; s < grid.sites(); ++s) {
    const Eigen::VectorXd p = grid.position(s);
    const bool x_in = p[0] >= -0.5 && p[0] < 0.5;
    bool rest_box = true, rest_zero = true;
    for (int a = 1; a < grid.d; ++a) {
      rest_box = rest_box && p[a] >= -0.5 && p[a] < 0.5;
      rest_zero = rest_zero && p[a] == 0.0;
    }
    bool take = false;
    switch (kind) {
      case TargetKind::box: take = x_in && rest_box; break;
      case TargetKind::segment: take = x_in && rest_zero; break;
      case TargetKind::cantor: take = x_in && rest_zero && in_cantor(p[0] + 0.5, levels); break;
    }
    if (take) out.push_back(s);
  }
  return out;
}

std::int64_t box_count(const GridSpec& grid, const SiteSet& set, double side) {
  std::vector<std::int64_t> keys;
  keys.reserve(set.size());
  for (auto site : set) {
    const Eigen::VectorXd p = grid.position(site);
    std::int64_t key = 0;
    for (int a = 0; a < grid.d; ++a) key = key * 65536 + static_cast<std::int64_t>(std::floor((p[a] + grid.side() / 2) / side));
    keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  return std::unique(keys.begin(), keys.end()) - keys.begin();
}

double euclidean_box_dimension(const GridSpec& grid, const SiteSet& set) {
  if (set.empty()) throw ValidationError("empty set has no box dimension");
  std::vector<double> x, y;
  for (double s = 0.5; s >= 2.0 * grid.spacing; s /= 2.0) {
    x.push_back(std::log(1.0 / s));
    y.push_back(std::log(static_cast<double>(box_count(grid, set, s))));
  }
  if (x.size() < 3) throw ValidationError("grid too coarse for box counting");
  return fit_line(Eigen::Map<Eigen::VectorXd>(x.data(), x.size()), Eigen::Map<Eigen::VectorXd>(y.data(), y.size())).slope;
}

std::vector<double> greedy_covering_radii(const WeightGrid& w, const SiteSet& X, int max_centers, Stencil st) {
  if (X.empty()) throw ValidationError("empty target set");
  std::vector<double> dist(w.grid.sites(), kInfinity);
  std::vector<double> radii;
  std::int64_t next = X.front();
  for (int k = 0; k < max_centers; ++k) {
    improve_distances(w, next, dist, nullptr, st);
    double far = -1.0;
    for (auto s : X)
      if (dist[s] > far) {
        far = dist[s];
        next = s;
      }
    radii.push_back(far);
    if (far <= 0.0) break;
  }
  return radii;
}

std::int64_t covering_number(const std::vector<double>& radii, double delta) {
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (radii[k] <= delta) return static_cast<std::int64_t>(k + 1);
  return -1;
}

CoveringFit fit_covering_dimension(const std::vector<double>& radii, int n_scales, int min_count) {
  if (static_cast<int>(radii.size()) <= min_count) throw ValidationError("covering traversal too short");
  const double hi = radii[min_count - 1], lo = radii.back();
  if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("covering radii do not resolve any scale range");
  CoveringFit fit;
  std::vector<double> x, y;
  for (int j = 0; j < n_scales; ++j) {
    // endpoints exact, pow can land just below the last radius
    const double delta = j == n_scales - 1 ? lo : hi * std::pow(lo / hi, static_cast<double>(j) / (n_scales - 1));
    const auto n = covering_number(radii, delta);
    fit.deltas.push_back(delta);
    fit.counts.push_back(n);
    x.push_back(std::log(1.0 / delta));
    y.push_back(std::log(static_cast<double>(n)));
  }
  std::vector<std::int64_t> distinct = fit.counts;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw ValidationError("fewer than 3 usable covering scales");
  fit.dimension = fit_line(Eigen::Map<Eigen::VectorXd>(x.data(), x.size()), Eigen::Map<Eigen::VectorXd>(y.data(), y.size())).slope;
  return fit;
}

int covering_fit_start(double euclidean_dim) {
  return std::max(4, static_cast<int>(std::lround(std::pow(4.0, euclidean_dim))));
}

double predicted_quantum_dimension(const CouplingParams& p, double euclidean_dim) {
  const double disc = p.Q * p.Q - 2.0 * euclidean_dim;
  if (disc < 0.0) throw ValidationError("Q^2 < 2 dim: no real quantum dimension");
  return (p.Q - std::sqrt(disc)) / p.xi;
}

double kpz_residual(const CouplingParams& p, double euclidean_dim, double q) {
  return euclidean_dim - (p.xi * p.Q * q - p.xi * p.xi * q * q / 2.0);
}

KpzReport kpz_check(const EnsembleSpec& ens, const MetricSetup& setup, TargetKind target, int max_centers) {
  ens.validate(2);
  KpzReport rep;
  rep.params = setup.params;
  const SiteSet X = target_sites(ens.grid, target);
  rep.euclidean_dim = euclidean_box_dimension(ens.grid, X);
  rep.predicted_quantum_dim = predicted_quantum_dimension(setup.params, rep.euclidean_dim);
  // below about 8 epsilon the metric is locally a smooth reweighting of the Euclidean one
  rep.center_limit = static_cast<int>(std::min<std::int64_t>(max_centers, box_count(ens.grid, X, kCoveringResolution * setup.epsilon)));
  rep.fit_min_count = covering_fit_start(rep.euclidean_dim);
  rep.fits = parallel_map<CoveringFit>(ens.size, [&](std::size_t i) {
    const WeightGrid w = metric_weights(ensemble_field(ens, static_cast<int>(i)), setup);
    return fit_covering_dimension(greedy_covering_radii(w, X, rep.center_limit, setup.stencil), 8, rep.fit_min_count);
  });
  std::vector<double> q;
  for (const auto& f : rep.fits) q.push_back(f.dimension);
  const auto e = mean_estimate(q);
  rep.quantum_dim = e.value;
  rep.quantum_stderr = e.stderr_;
  rep.residual = kpz_residual(setup.params, rep.euclidean_dim, rep.quantum_dim);
  return rep;
}

// ---- shell correlations

ShellCorrelationReport shell_correlation_from(const std::vector<std::vector<double>>& values,
                                              const std::vector<double>& radii, std::uint64_t seed) {
  const std::size_t n = values.size(), K = radii.size();
  if (n < 10) throw ValidationError("shell correlation needs at least 10 members");
  ShellCorrelationReport rep;
  rep.radii = radii;
  rep.n = static_cast<int>(n);
  rep.stderr_ = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<std::vector<double>> ind(K, std::vector<double>(n));
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> col;
    for (const auto& row : values) col.push_back(row[k]);
    const double m = median(col);
    for (std::size_t i = 0; i < n; ++i) ind[k][i] = col[i] > m ? 1.0 : 0.0;
  }
  // Sattolo's shuffle gives a single cycle, so no member is paired with itself.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto rng = make_stream(seed, StreamPurpose::scramble, 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform01() * i)]);
  rep.corr.resize(K, K);
  rep.scrambled.resize(K, K);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b) {
      rep.corr(a, b) = pearson(ind[a], ind[b]);
      std::vector<double> shuffled(n);
      for (std::size_t i = 0; i < n; ++i) shuffled[i] = ind[b][perm[i]];
      rep.scrambled(a, b) = pearson(ind[a], shuffled);
      if (a + 2 <= b || b + 2 <= a) rep.max_abs_two_apart = std::max(rep.max_abs_two_apart, std::abs(rep.corr(a, b)));
      rep.max_abs_scrambled = std::max(rep.max_abs_scrambled, std::abs(rep.scrambled(a, b)));
    }
  return rep;
}

std::vector<double> shell_values(const FieldSample& field, const MetricSetup& setup, const std::vector<double>& radii) {
  const WeightGrid w = metric_weights(field, setup);
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(field.grid.d);
  const double xi = setup.params.xi, xi_q = setup.params.xi * setup.params.Q;
  std::vector<double> out;
  for (double r : radii) {
    const double D = across_distance(w, {origin, r / 2.0, r}, setup.stencil).value;
    out.push_back(D * std::pow(r, -xi_q) * std::exp(-xi * sphere_average(field, origin, r)));
  }
  return out;
}

ShellCorrelationReport shell_correlation_probe(const EnsembleSpec& ens, const MetricSetup& setup,
                                               const std::vector<double>& radii) {
  ens.validate(10);
  if (radii.size() < 4) throw ValidationError("shell probe needs at least 4 radii");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (radii[k] > 0.5 * radii[k - 1] + 1e-12) throw ValidationError("shell radii must shrink by at least a factor 2");
  auto values = parallel_map<std::vector<double>>(ens.size, [&](std::size_t i) {
    return shell_values(ensemble_field(ens, static_cast<int>(i)), setup, radii);
  });
  return shell_correlation_from(values, radii, ens.base_seed);
}

}  // namespace lfpp
