#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lfpp/field.hpp"
#include "lfpp/kernel.hpp"
#include "lfpp/metric.hpp"
#include "lfpp/pipeline.hpp"

namespace lfpp {

// Shared knobs of the field-to-metric pipelines.
struct MetricSetup {
  CouplingParams params;
  double epsilon = 0.025;
  BumpKind bump = BumpKind::canonical;
  Stencil stencil = Stencil::moore;
};

// ---- distance exponent -------------------------------------------------------------------

struct ExponentFit {
  std::vector<double> x_values;  // log epsilon
  std::vector<double> y_values;  // log median distance
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double r_squared = 0.0;
  double implied_xi_q = 0.0;  // 1 - slope
  std::optional<double> target_xi_q;
};

// Needs >= 4 distinct epsilons spanning at least a factor 8.
ExponentFit fit_distance_exponent(const std::vector<std::pair<double, double>>& medians,
                                  std::optional<CouplingParams> params = std::nullopt);

struct MedianSeries {
  std::vector<double> epsilons;
  std::vector<std::vector<double>> samples;  // [epsilon][member]
  std::vector<MedianReport> medians;
};

// D^eps(x, y) across the ensemble for each epsilon, all epsilons sharing each member's field.
MedianSeries distance_medians(const EnsembleSpec& ens, const MetricSetup& setup, const std::vector<double>& epsilons,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// ---- c_r scaling -------------------------------------------------------------------------

struct CrSample {
  std::vector<double> distance;  // D(r x0, r y0) per r
  std::vector<double> h_r;       // h_r(0) per r, from the unmollified field
};

// One member: field is the anchored, unmollified field; the metric uses its mollification.
CrSample c_r_sample(const FieldSample& field, const MetricSetup& setup, const std::vector<double>& r_list,
                    const Eigen::VectorXd& x0, const Eigen::VectorXd& y0);

struct CrReport {
  std::vector<double> r_list;
  double xi_q = 0.0;
  std::vector<double> medians;  // of r^{-xi Q} e^{-xi h_r(0)} D(r x0, r y0)
  double spread = 0.0;          // max/min of medians
  double control_xi_q = 0.0;
  std::vector<double> control_medians;
  double control_spread = 0.0;
  std::vector<CrSample> samples;
};

double normalized_c_r(const CrSample& s, std::size_t k, double r, double xi, double xi_q);
CrReport c_r_report(const std::vector<CrSample>& samples, const std::vector<double>& r_list, double xi,
                    double xi_q, double control_offset = 0.3);
CrReport check_c_r_scaling(const EnsembleSpec& ens, const MetricSetup& setup, const std::vector<double>& r_list,
                           double control_offset = 0.3);

// ---- moments -------------------------------------------------------------------------------

enum class MomentKind { point_point, set_set, diameter };
MomentKind parse_moment_kind(const std::string& s);
std::string to_string(MomentKind k);

struct MomentReport {
  int n = 0;
  double median = 0.0;
  std::vector<double> p_list;
  std::vector<double> moments;
  std::vector<double> moment_stderr;
  std::vector<double> half_moments;     // first half of the ensemble
  std::vector<double> stability_ratio;  // moments / half_moments
  std::vector<double> thresholds;       // A * median
  std::vector<std::int64_t> exceedances;
  std::vector<double> survival;
  std::vector<Interval> survival_ci;
  std::optional<double> tail_slope;  // log survival vs log A, when >= 2 thresholds are hit
  bool widened_uncertainty = false;   // < 20 exceedances at the largest threshold
  bool faster_than_power = false;     // survival beats A^{-power_reference} over the thresholds
  double power_reference = 6.0;
};

MomentReport moment_tail_report(const std::vector<double>& samples, const std::vector<double>& p_list,
                                const std::vector<double>& multipliers = {2.0, 4.0, 8.0},
                                double power_reference = 6.0);

// Distances of the given kind normalised by the ensemble median.
std::vector<double> moment_samples(const EnsembleSpec& ens, const MetricSetup& setup, MomentKind kind);

// ---- Holder exponents ------------------------------------------------------------------------

struct HolderReport {
  std::vector<double> scales;
  std::vector<double> exponents;  // one local slope per base pair
  double min = 0.0, median = 0.0, max = 0.0;
  double band_lo = 0.0, band_hi = 0.0;  // xi (Q - sqrt(2d)), xi (Q + sqrt(2d))
  bool median_in_band = false;
};

// distances[pair][scale] -> per-pair slope of log D on log scale.
HolderReport holder_from_distances(const std::vector<std::vector<double>>& distances, const std::vector<double>& scales,
                                   const CouplingParams& params);
// Distances from base points to base + scale * axis direction, for one weight grid.
std::vector<std::vector<double>> holder_distances(const WeightGrid& w, const std::vector<double>& scales,
                                                  int n_pairs, std::uint64_t seed, Stencil st = Stencil::moore);
HolderReport holder_exponent_estimate(const EnsembleSpec& ens, const MetricSetup& setup,
                                      const std::vector<double>& scales, int pairs_per_seed);

// ---- thick points -------------------------------------------------------------------------

struct ThickPointReport {
  double alpha = 0.0;
  double epsilon_probe = 0.0;
  double window_u = 0.0;
  SiteSet mask;  // thick sites at scale epsilon_probe
  std::vector<double> box_sizes;
  std::vector<std::int64_t> box_counts;
  double fitted_dimension = 0.0;
  double stderr_dimension = 0.0;
  bool empty = false;
  bool counts_monotone = true;
  int members = 1;
};

inline double default_window(int d) { return 0.1 * std::sqrt(2.0 * d); }

// Window at scale delta: |h_delta(x) - alpha L| <= u sqrt(L), L = log(1/delta).
bool is_thick(double h_delta, double delta, double alpha, double u);
// Dyadic box sides epsilon_probe * 2^j, kept below 0.3.
std::vector<double> thick_box_sizes(const GridSpec& grid, double epsilon_probe);
// Number of delta-boxes whose centre is thick at scale delta, per box size.
std::vector<std::int64_t> thick_box_counts(const FieldSample& field, double alpha, const std::vector<double>& sizes,
                                           double u);
ThickPointReport thick_points(const FieldSample& field, double alpha, double epsilon_probe,
                              std::optional<double> u = std::nullopt);
// Counts pooled over the ensemble; mask from member 0.
ThickPointReport thick_points_ensemble(const EnsembleSpec& ens, double alpha, double epsilon_probe,
                                       std::optional<double> u = std::nullopt);
double predicted_thick_dimension(int d, double alpha);

// ---- KPZ ---------------------------------------------------------------------------------

enum class TargetKind { box, segment, cantor };
TargetKind parse_target_kind(const std::string& s);
std::string to_string(TargetKind k);

// Deterministic targets: box [-1/2, 1/2]^d, segment [-1/2, 1/2] e_1, middle-thirds Cantor dust on that segment.
SiteSet target_sites(const GridSpec& grid, TargetKind kind);
double euclidean_box_dimension(const GridSpec& grid, const SiteSet& set);
// Number of side-s boxes of the grid lattice meeting the set.
std::int64_t box_count(const GridSpec& grid, const SiteSet& set, double side);

// Farthest-point traversal of X; radii[k] is the covering radius of X by the first k+1 centres.
std::vector<double> greedy_covering_radii(const WeightGrid& w, const SiteSet& X, int max_centers,
                                          Stencil st = Stencil::moore);
// N(delta) = fewest traversal prefixes whose covering radius is <= delta.
std::int64_t covering_number(const std::vector<double>& radii, double delta);

struct CoveringFit {
  std::vector<double> deltas;
  std::vector<std::int64_t> counts;
  double dimension = 0.0;
};
CoveringFit fit_covering_dimension(const std::vector<double>& radii, int n_scales = 8, int min_count = 4);
// Smallest count the fit starts from, 4^dim0: the first two dyadic generations of a covering
// see the edges of the set. On the flat metric a box reads 1.67 from N = 4 and 1.98 from N = 16.
int covering_fit_start(double euclidean_dim);

double predicted_quantum_dimension(const CouplingParams& p, double euclidean_dim);
// dim0 - (xi Q q - xi^2 q^2 / 2)
double kpz_residual(const CouplingParams& p, double euclidean_dim, double quantum_dim);

struct KpzReport {
  double euclidean_dim = 0.0;
  double quantum_dim = 0.0;
  double quantum_stderr = 0.0;
  double predicted_quantum_dim = 0.0;
  double residual = 0.0;
  CouplingParams params;
  int center_limit = 0;           // traversal length actually used
  int fit_min_count = 4;
  std::vector<CoveringFit> fits;  // one per member
};

// Covering stops once balls would be smaller than this many epsilon, counted by Euclidean boxes of X.
inline constexpr double kCoveringResolution = 8.0;

KpzReport kpz_check(const EnsembleSpec& ens, const MetricSetup& setup, TargetKind target, int max_centers);

// ---- shell correlations --------------------------------------------------------------------

struct ShellCorrelationReport {
  std::vector<double> radii;
  Eigen::MatrixXd corr;
  Eigen::MatrixXd scrambled;
  double stderr_ = 0.0;  // 1/sqrt(n) under independence
  int n = 0;
  double max_abs_two_apart = 0.0;
  double max_abs_scrambled = 0.0;
};

// values[member][k]: normalised across distance at radius k. Events are "above the ensemble median".
ShellCorrelationReport shell_correlation_from(const std::vector<std::vector<double>>& values,
                                              const std::vector<double>& radii, std::uint64_t seed);
std::vector<double> shell_values(const FieldSample& field, const MetricSetup& setup, const std::vector<double>& radii);
ShellCorrelationReport shell_correlation_probe(const EnsembleSpec& ens, const MetricSetup& setup,
                                               const std::vector<double>& radii);

}  // namespace lfpp
