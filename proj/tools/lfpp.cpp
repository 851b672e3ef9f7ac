#include <tbb/global_control.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <new>
#include <sstream>
#include <thread>

#include "lfpp/acceptance.hpp"
#include "lfpp/config.hpp"
#include "lfpp/field.hpp"
#include "lfpp/gwtools.hpp"
#include "lfpp/io.hpp"
#include "lfpp/kernel.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/pipeline.hpp"
#include "lfpp/scaling.hpp"
#include "lfpp/stats.hpp"
#include "lfpp/version.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace lfpp {
namespace {

enum Exit { ok = 0, usage = 1, validation = 2, resource = 3, property = 4 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out_dir = ".";
  std::string format = "csv";
};

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return format_double(v.get<double>());
}

// Everything a command produced, written out by run().
struct Run {
  const Globals& g;
  Config config;
  std::string command;
  std::vector<std::uint64_t> seeds;
  json report = json::object();
  std::vector<std::string> outputs;
  int exit_code = Exit::ok;

  fs::path path(const std::string& name) const { return fs::path(g.out_dir) / name; }
  void wrote(const fs::path& p) { outputs.push_back(p.string()); }

  // A table goes to <name>.csv or <name>.json depending on --format.
  void table(const std::string& name, const std::vector<std::string>& header, const std::vector<json>& rows) {
    if (g.format == "json") {
      json arr = json::array();
      for (const auto& r : rows) {
        json o = json::object();
        for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
        arr.push_back(o);
      }
      const auto p = path(name + ".json");
      write_text(p, arr.dump(2) + "\n");
      wrote(p);
      return;
    }
    Csv csv(header);
    for (const auto& r : rows) {
      std::vector<std::string> cells;
      for (const auto& v : r) cells.push_back(cell(v));
      csv.row(cells);
    }
    const auto p = path(name + ".csv");
    csv.save(p);
    wrote(p);
  }
};

std::uint64_t base_seed(const Run& r) {
  if (r.g.seed) return *r.g.seed;
  return static_cast<std::uint64_t>(r.config.integer("seeds", 1));
}

EnsembleSpec ensemble(Run& r, int default_size, int min_size = 1) {
  EnsembleSpec e{config_grid(r.config), static_cast<int>(r.config.integer("ensemble_size", default_size)), base_seed(r)};
  e.validate(min_size);
  for (int i = 0; i < e.size; ++i) r.seeds.push_back(e.seed(i));
  return e;
}

Stencil parse_stencil(const std::string& s) {
  if (s == "moore") return Stencil::moore;
  if (s == "von_neumann") return Stencil::von_neumann;
  throw ValidationError("unknown stencil '" + s + "' (expected moore or von_neumann)");
}

MetricSetup metric_setup(const Run& r, double default_eps = 0.025) {
  MetricSetup m;
  m.params = config_params(r.config);
  m.epsilon = r.config.real("epsilon", default_eps);
  m.bump = config_bump(r.config);
  m.stencil = parse_stencil(r.config.text("stencil", "moore"));
  return m;
}

Eigen::VectorXd point(const std::vector<double>& v, int d, const std::string& key) {
  if (static_cast<int>(v.size()) != d) throw ValidationError(key + " needs " + std::to_string(d) + " coordinates");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), d);
}

Eigen::VectorXd unit_point(int d, double x1) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
  p[0] = x1;
  return p;
}

// ---- commands

void cmd_build_kernel(Run& r) {
  const int d = static_cast<int>(r.config.integer("dimension", 2));
  const BumpKind kind = config_bump(r.config);
  const double eps = r.config.real("epsilon", 0.025);
  std::optional<double> amplitude;
  if (r.config.has("bump_amplitude")) amplitude = r.config.real("bump_amplitude");
  const BumpProfile bump = make_bump(d, kind, 1.0, amplitude);
  validate_bump(bump);
  const BumpSpectrum spec(bump);
  const RadialKernel k = build_kernel(eps, spec);
  const RadialKernel k1 = build_kernel(1.0, spec);
  double scaling = 0.0;
  for (double u : {0.0, 0.25, 0.5, 0.75, 1.0, 1.5})
    if (std::abs(k1(u)) > 1e-6 * k1(0.0))
      scaling = std::max(scaling, std::abs(k(eps * u) - std::pow(eps, -d) * k1(u)) / std::abs(std::pow(eps, -d) * k1(u)));
  const auto p = r.path("kernel.lfpk");
  write_kernel_lfpk(p, k);
  r.wrote(p);
  std::vector<json> rows;
  const auto& grid = k.profile.grid();
  for (int i = 0; i < grid.n; ++i) rows.push_back(json::array({grid.at(i), k.profile.values()[i]}));
  r.table("kernel_profile", {"r", "K"}, rows);
  r.report = {{"dimension", d},
              {"bump", to_string(kind)},
              {"epsilon", eps},
              {"mass", k.mass},
              {"mass_residual", std::abs(k.mass - 1.0)},
              {"scaling_residual", scaling},
              {"decay_constant", k.decay_constant}};
}

void cmd_sample(Run& r) {
  const auto ens = ensemble(r, 1);
  const std::string sampler = r.config.text("sampler", "spectral");
  const std::string trunc = r.config.text("truncation", "none");
  const bool write = r.config.boolean("write_fields", true);
  const BumpKind kind = config_bump(r.config);
  std::optional<double> eps;
  if (r.config.has("epsilon")) eps = r.config.real("epsilon");
  std::vector<json> rows;
  for (int i = 0; i < ens.size; ++i) {
    FieldSample f;
    double Z = 1.0;
    if (sampler == "spectral") {
      f = ensemble_field(ens, i);
      if (eps) {
        const auto kernel = KernelCache::global().kernel(ens.grid.d, kind, *eps);
        if (trunc == "none") {
          f = shared_mollifier(ens.grid, kind, *eps)->apply(f);
        } else {
          if (trunc != "bar_sqrt_eps" && trunc != "hat_log_power") throw ValidationError("unknown truncation '" + trunc + "'");
          auto t = truncated_mollify(f, *kernel, trunc == "bar_sqrt_eps" ? TruncationMode::bar_sqrt_eps : TruncationMode::hat_log_power);
          f = std::move(t.field);
          Z = t.Z;
        }
      }
    } else if (sampler == "white_noise_layers") {
      if (!eps) throw ValidationError("white_noise_layers needs epsilon");
      const auto spec = KernelCache::global().spectrum(ens.grid.d, kind);
      f = sample_white_noise_field(ens.grid, *eps, r.config.real("R", 1.0), *spec, ens.seed(i));
    } else {
      throw ValidationError("unknown sampler '" + sampler + "' (expected spectral or white_noise_layers)");
    }
    if (write) {
      const auto p = r.path("field_" + std::to_string(i) + ".lfpf");
      write_field_lfpf(p, f);
      r.wrote(p);
    }
    const double m = f.values.mean();
    const double var = (f.values - m).square().mean();
    rows.push_back(json::array({i, ens.seed(i), m, var, f.values.minCoeff(), f.values.maxCoeff(), Z}));
  }
  r.table("samples", {"member", "seed", "mean", "variance", "min", "max", "Z"}, rows);
  r.report = {{"sampler", sampler}, {"members", ens.size}, {"grid_n", ens.grid.n}, {"spacing", ens.grid.spacing}};
  if (eps) r.report["epsilon"] = *eps;
}

void cmd_distance(Run& r) {
  const auto ens = ensemble(r, 1);
  const MetricSetup setup = metric_setup(r);
  const int d = ens.grid.d;
  const std::string query = r.config.text("query", "point_point");
  const Eigen::VectorXd src = point(r.config.reals("src", std::vector<double>(d, 0.0)), d, "src");
  std::vector<double> dst_default(d, 0.0);
  dst_default[0] = 1.0;
  const Eigen::VectorXd dst = point(r.config.reals("dst", dst_default), d, "dst");
  const bool want_path = r.config.boolean("write_path", false);
  ShellSpec shell{src, r.config.real("shell_inner", 0.25), r.config.real("shell_outer", 0.5)};
  std::int64_t s_site = 0, d_site = 0;
  if (query == "point_point") {
    s_site = site_of_point(ens.grid, src);
    d_site = site_of_point(ens.grid, dst);
  } else if (query == "across" || query == "around") {
    validate_shell(ens.grid, shell);
  } else {
    throw ValidationError("unknown query '" + query + "' (expected point_point, across or around)");
  }
  const auto moll = shared_mollifier(ens.grid, setup.bump, setup.epsilon);
  std::vector<double> values(ens.size);
  std::vector<json> rows;
  for (int i = 0; i < ens.size; ++i) {
    const WeightGrid w = weight_grid(moll->apply(ensemble_field(ens, i)), setup.params);
    DistanceResult res;
    if (query == "point_point") {
      res = distance(w, {s_site}, {d_site}, nullptr, {setup.stencil, want_path});
    } else if (query == "across") {
      res = across_distance(w, shell, setup.stencil);
    } else {
      res = around_distance(w, shell, static_cast<int>(r.config.integer("n_rays", 8)), setup.stencil).result;
    }
    values[i] = res.value;
    rows.push_back(json::array({i, ens.seed(i), res.value}));
    if (want_path && res.path) {
      std::vector<json> prow;
      for (auto s : *res.path) {
        const Eigen::VectorXd x = ens.grid.position(s);
        json row = json::array({s});
        for (int a = 0; a < d; ++a) row.push_back(x[a]);
        prow.push_back(row);
      }
      std::vector<std::string> header = {"site", "x1", "x2", "x3"};
      header.resize(1 + d);
      r.table("path_" + std::to_string(i), header, prow);
    }
  }
  r.table("distances", {"member", "seed", "distance"}, rows);
  r.report = {{"query", query}, {"members", ens.size}, {"epsilon", setup.epsilon}, {"xi", setup.params.xi}};
  if (ens.size >= 100) {
    const auto m = median_distance(values, ens.base_seed);
    r.report["median"] = m.median;
    r.report["median_ci"] = {m.ci.lo, m.ci.hi};
  }
}

std::vector<std::pair<double, double>> read_medians(const fs::path& p) {
  std::istringstream in(read_text(p));
  std::string line;
  std::vector<std::pair<double, double>> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("medians file rows need epsilon,median: " + line);
    try {
      out.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::invalid_argument&) {
      if (!out.empty()) throw ValidationError("malformed medians row: " + line);  // only a header may be non-numeric
    }
  }
  return out;
}

void cmd_fit_exponent(Run& r) {
  std::vector<std::pair<double, double>> pts;
  std::optional<CouplingParams> params;
  if (r.config.has("xi") || r.config.has("gamma") || !r.config.has("medians_file")) params = config_params(r.config);
  if (r.config.has("medians_file")) {
    fs::path p = r.config.text("medians_file");
    if (p.is_relative() && !r.g.config_path.empty()) p = fs::path(r.g.config_path).parent_path() / p;
    if (!fs::exists(p)) throw ValidationError("medians file not found: " + p.string());
    pts = read_medians(p);
  } else {
    const auto ens = ensemble(r, 100, 100);
    MetricSetup setup = metric_setup(r);
    const int d = ens.grid.d;
    const auto eps = r.config.reals("epsilon_list", std::vector<double>{0.2, 0.1, 0.05, 0.025});
    const auto series = distance_medians(ens, setup, eps, point(r.config.reals("src", std::vector<double>(d, 0.0)), d, "src"),
                                         r.config.has("dst") ? point(r.config.reals("dst"), d, "dst") : unit_point(d, 1.0));
    std::vector<json> rows;
    for (std::size_t k = 0; k < eps.size(); ++k) {
      pts.push_back({eps[k], series.medians[k].median});
      rows.push_back(json::array({eps[k], series.medians[k].median, series.medians[k].ci.lo, series.medians[k].ci.hi}));
    }
    r.table("medians", {"epsilon", "median", "ci_lo", "ci_hi"}, rows);
  }
  const auto fit = fit_distance_exponent(pts, params);
  r.report = {{"slope", fit.slope},         {"stderr", fit.stderr_slope}, {"intercept", fit.intercept},
              {"r_squared", fit.r_squared}, {"implied_xi_q", fit.implied_xi_q}};
  if (fit.target_xi_q) r.report["target_xi_q"] = *fit.target_xi_q;
}

void cmd_c_r_check(Run& r) {
  const auto ens = ensemble(r, 100, 100);
  const MetricSetup setup = metric_setup(r);
  const auto radii = r.config.reals("r_list", std::vector<double>{1.0, 0.5, 0.25});
  const auto rep = check_c_r_scaling(ens, setup, radii, r.config.real("xi_q_offset", 0.3));
  std::vector<json> rows;
  for (std::size_t k = 0; k < radii.size(); ++k) rows.push_back(json::array({radii[k], rep.medians[k], rep.control_medians[k]}));
  r.table("c_r_medians", {"r", "median", "control_median"}, rows);
  r.report = {{"xi_q", rep.xi_q},
              {"spread", rep.spread},
              {"control_xi_q", rep.control_xi_q},
              {"control_spread", rep.control_spread}};
}

void cmd_moments(Run& r) {
  const auto ens = ensemble(r, 100, 100);
  const MetricSetup setup = metric_setup(r);
  const MomentKind kind = parse_moment_kind(r.config.text("moment_kind", "point_point"));
  const auto p_list = r.config.reals("p_list", std::vector<double>{-2.0, -1.0, 1.0, 2.0, 4.0});
  const auto samples = moment_samples(ens, setup, kind);
  const auto rep = moment_tail_report(samples, p_list);
  std::vector<json> rows;
  for (std::size_t k = 0; k < p_list.size(); ++k)
    rows.push_back(json::array({p_list[k], rep.moments[k], rep.moment_stderr[k], rep.stability_ratio[k]}));
  r.table("moments", {"p", "moment", "stderr", "stability_ratio"}, rows);
  std::vector<json> tail;
  for (std::size_t k = 0; k < rep.thresholds.size(); ++k)
    tail.push_back(json::array({rep.thresholds[k], rep.exceedances[k], rep.survival[k], rep.survival_ci[k].lo, rep.survival_ci[k].hi}));
  r.table("moment_tail", {"threshold", "exceedances", "survival", "ci_low", "ci_high"}, tail);
  r.report = {{"kind", to_string(kind)},
              {"n", rep.n},
              {"median", rep.median},
              {"widened_uncertainty", rep.widened_uncertainty},
              {"faster_than_power", rep.faster_than_power},
              {"power_reference", rep.power_reference}};
  if (rep.tail_slope) r.report["tail_slope"] = *rep.tail_slope;
  if (kind == MomentKind::diameter) r.report["note"] = "diameter is a lower-bound surrogate over boundary marks";
}

void cmd_holder(Run& r) {
  const auto ens = ensemble(r, 10);
  const MetricSetup setup = metric_setup(r);
  const auto scales = r.config.reals("holder_scales", std::vector<double>{1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4});
  const auto rep = holder_exponent_estimate(ens, setup, scales, static_cast<int>(r.config.integer("pairs_per_seed", 20)));
  std::vector<json> rows;
  for (std::size_t i = 0; i < rep.exponents.size(); ++i) rows.push_back(json::array({i, rep.exponents[i]}));
  r.table("holder_exponents", {"pair", "exponent"}, rows);
  r.report = {{"min", rep.min},         {"median", rep.median}, {"max", rep.max},
              {"band_lo", rep.band_lo}, {"band_hi", rep.band_hi}, {"median_in_band", rep.median_in_band}};
}

void cmd_thick_points(Run& r) {
  const auto ens = ensemble(r, 1);
  const double alpha = r.config.real("alpha", 0.0);
  const double probe = r.config.real("epsilon_probe", 4.0 * ens.grid.spacing);
  std::optional<double> u;
  if (r.config.has("window_u")) u = r.config.real("window_u");
  const auto rep = thick_points_ensemble(ens, alpha, probe, u);
  std::vector<json> rows;
  for (std::size_t k = 0; k < rep.box_sizes.size(); ++k) rows.push_back(json::array({rep.box_sizes[k], rep.box_counts[k]}));
  r.table("thick_counts", {"box_size", "count"}, rows);
  r.report = {{"alpha", alpha},
              {"epsilon_probe", probe},
              {"window_u", rep.window_u},
              {"fitted_dimension", rep.fitted_dimension},
              {"stderr", rep.stderr_dimension},
              {"predicted_dimension", predicted_thick_dimension(ens.grid.d, alpha)},
              {"empty", rep.empty},
              {"counts_monotone", rep.counts_monotone},
              {"mask_sites_member0", rep.mask.size()}};
}

void cmd_kpz(Run& r) {
  const auto ens = ensemble(r, 4, 2);
  MetricSetup setup = metric_setup(r, 2.0 * config_grid(r.config).spacing);
  const TargetKind target = parse_target_kind(r.config.text("target", "box"));
  const auto rep = kpz_check(ens, setup, target, static_cast<int>(r.config.integer("max_centers", 100000)));
  std::vector<json> rows;
  for (std::size_t i = 0; i < rep.fits.size(); ++i) {
    const auto& f = rep.fits[i];
    for (std::size_t k = 0; k < f.deltas.size(); ++k) rows.push_back(json::array({i, f.deltas[k], f.counts[k]}));
  }
  r.table("covering_counts", {"member", "delta", "count"}, rows);
  r.report = {{"target", to_string(target)},
              {"euclidean_dim", rep.euclidean_dim},
              {"quantum_dim", rep.quantum_dim},
              {"stderr", rep.quantum_stderr},
              {"predicted_quantum_dim", rep.predicted_quantum_dim},
              {"residual", rep.residual},
              {"center_limit", rep.center_limit},
              {"fit_min_count", rep.fit_min_count}};
}

void cmd_shell_corr(Run& r) {
  const auto ens = ensemble(r, 100, 10);
  const MetricSetup setup = metric_setup(r);
  const auto radii = r.config.reals("radii", std::vector<double>{1.0, 0.5, 0.25, 0.125});
  const auto rep = shell_correlation_probe(ens, setup, radii);
  std::vector<json> rows;
  for (std::size_t i = 0; i < radii.size(); ++i)
    for (std::size_t j = 0; j < radii.size(); ++j)
      rows.push_back(json::array({radii[i], radii[j], rep.corr(i, j), rep.scrambled(i, j)}));
  r.table("shell_correlations", {"r_i", "r_j", "corr", "scrambled"}, rows);
  r.report = {{"n", rep.n},
              {"stderr", rep.stderr_},
              {"max_abs_two_apart", rep.max_abs_two_apart},
              {"max_abs_scrambled", rep.max_abs_scrambled}};
}

void cmd_gw_tails(Run& r) {
  const auto drifts = r.config.reals("drift_list", std::vector<double>{1.0});
  const int n = static_cast<int>(r.config.integer("n_samples", 100000));
  const std::uint64_t seed = base_seed(r);
  r.seeds.push_back(seed);
  json fits = json::array();
  std::vector<json> rows;
  for (double a : drifts) {
    DriftedProcessSpec spec;
    spec.drift_a = a;
    spec.horizon_T = r.config.real("horizon_T", 30.0);
    spec.dt = r.config.real("dt", 1e-3);
    spec.bridge_correction = r.config.boolean("bridge_correction", true);
    std::vector<double> ys, xs;
    for (int k = 0; k <= 10; ++k) ys.push_back((0.5 + 0.25 * k) / a);
    for (int k = 0; k < 8; ++k) xs.push_back(5.0 * std::pow(10.0, k / 7.0));
    ys = r.config.reals("y_list", ys);
    xs = r.config.reals("x_list", xs);
    const auto paths = simulate_paths(spec, n, seed);
    const auto sup = sup_tail_from(paths, spec, ys);
    const auto integral = exp_integral_tail_from(paths, spec, xs);
    for (const auto& [rep, kind] : {std::pair{&sup, "sup"}, std::pair{&integral, "integral"}}) {
      for (std::size_t k = 0; k < rep->thresholds.size(); ++k)
        rows.push_back(json::array({a, kind, rep->thresholds[k], rep->hits[k], rep->survival[k], rep->ci[k].lo, rep->ci[k].hi,
                                    rep->oracle.empty() ? 0.0 : rep->oracle[k], static_cast<bool>(rep->used[k])}));
      json f = {{"a", a},
                {"kind", kind},
                {"slope", rep->slope},
                {"stderr", rep->stderr_slope},
                {"target_slope", rep->target_slope},
                {"truncation_bound", rep->truncation_bound},
                {"dropped", rep->dropped}};
      if (rep->oracle_slope) f["oracle_slope"] = *rep->oracle_slope;
      fits.push_back(f);
    }
  }
  r.table("tails", {"a", "kind", "threshold", "hits", "survival", "ci_low", "ci_high", "oracle", "used"}, rows);
  r.report = {{"n_samples", n}, {"fits", fits}};
}

void cmd_verify(Run& r, const std::vector<int>& cli_ids) {
  std::vector<int> ids = cli_ids;
  if (ids.empty())
    for (auto v : r.config.integers("criteria", std::vector<std::int64_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}))
      ids.push_back(static_cast<int>(v));
  AcceptanceOptions opt;
  opt.out_dir = r.path("acceptance");
  opt.seed = r.g.seed.value_or(static_cast<std::uint64_t>(r.config.integer("seeds", kAcceptanceSeed)));
  r.seeds.push_back(opt.seed);
  bool all = true;
  json results = json::array();
  for (int id : ids) {
    const auto res = run_criterion(id, opt);
    std::cout << result_line(res) << std::endl;
    all = all && res.pass;
    results.push_back({{"criterion", id}, {"name", res.name}, {"pass", res.pass}, {"summary", res.summary}});
    r.wrote(opt.out_dir / ("c" + std::to_string(id)));
  }
  r.report = {{"all_pass", all}, {"criteria", results}};
  if (!all) r.exit_code = Exit::property;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int run(const Globals& g, const std::string& name, const std::function<void(Run&)>& body) {
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  Run r{g, g.config_path.empty() ? Config() : Config::load(g.config_path), name, {}, json::object(), {}, Exit::ok};
  fs::create_directories(g.out_dir);
  body(r);
  json report = {{"command", name}, {"config_hash", r.config.hash()}, {"code_version", kCodeVersion}};
  for (auto& [k, v] : r.report.items()) report[k] = v;
  const auto rp = r.path("report.json");
  write_text(rp, report.dump(2) + "\n");
  r.wrote(rp);
  // timestamps stay here so every other output is reproducible byte for byte
  json manifest = {{"command", name},
                   {"config_path", g.config_path},
                   {"config_hash", r.config.hash()},
                   {"code_version", kCodeVersion},
                   {"seeds", r.seeds},
                   {"started", started},
                   {"finished", utc_now()},
                   {"wall_time_ms", std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count()},
                   {"outputs", r.outputs}};
  write_text(r.path("manifest.json"), manifest.dump(2) + "\n");
  std::cout << report.dump(2) << std::endl;
  return r.exit_code;
}

}  // namespace
}  // namespace lfpp

int main(int argc, char** argv) {
  using namespace lfpp;
  CLI::App app{"Liouville first passage percolation experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "experiment config (flat YAML)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "base seed, overrides the config");
  app.add_option("--threads", g.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--format", g.format, "table format")->check(CLI::IsMember({"csv", "json"}));

  std::vector<int> criteria;
  struct Command {
    std::string name, help;
    std::function<void(Run&)> fn;
  };
  const std::vector<Command> commands = {
      {"build-kernel", "tabulate the mollifier kernel", cmd_build_kernel},
      {"sample", "sample fields", cmd_sample},
      {"distance", "one LFPP distance query", cmd_distance},
      {"fit-exponent", "fit the distance exponent over epsilon", cmd_fit_exponent},
      {"c-r-check", "normalised c_r medians across scales", cmd_c_r_check},
      {"moments", "moments and tails of normalised distances", cmd_moments},
      {"holder", "local Holder exponents", cmd_holder},
      {"thick-points", "box-counting dimension of thick points", cmd_thick_points},
      {"kpz", "KPZ relation for a target set", cmd_kpz},
      {"shell-corr", "correlations of across distances of nested shells", cmd_shell_corr},
      {"gw-tails", "tails of the sup and exponential integral of drifted processes", cmd_gw_tails},
      {"verify", "run acceptance criteria", [&](Run& r) { cmd_verify(r, criteria); }}};
  app.fallthrough();
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) subs[c.name] = app.add_subcommand(c.name, c.help);
  subs["verify"]->add_option("-c,--criterion", criteria, "criteria to run")->check(CLI::Range(1, kCriteria));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }
  std::unique_ptr<tbb::global_control> threads;
  if (g.threads > 0) threads = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, g.threads);
  try {
    for (const auto& c : commands)
      if (subs[c.name]->parsed()) return run(g, c.name, c.fn);
  } catch (const ResourceError& e) {
    std::cerr << "resource: " << e.what() << "\n";
    return Exit::resource;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource: out of memory\n";
    return Exit::resource;
  } catch (const Error& e) {
    std::cerr << "validation: " << e.what() << "\n";
    return Exit::validation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "validation: " << e.what() << "\n";
    return Exit::validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::usage;
  }
  return Exit::usage;
}
