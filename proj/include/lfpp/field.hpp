#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lfpp/fft.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/kernel.hpp"

namespace lfpp {

enum class Sampler : std::uint8_t { white_noise_layers = 1, spectral = 2 };
std::string to_string(Sampler s);

struct Anchor {
  Eigen::VectorXd center;
  double radius = 1.0;
};

struct FieldSample {
  GridSpec grid;
  Eigen::ArrayXd values;
  double epsilon = 0.0;  // 0: unmollified
  std::optional<Anchor> anchor;
  Sampler sampler = Sampler::spectral;
  std::uint64_t seed = 0;
};

struct LayerStack {
  std::vector<double> t_layers;  // layer edges, decreasing from R_top to epsilon_bottom
  std::vector<Eigen::ArrayXd> layers;  // layer k covers [t_layers[k+1], t_layers[k]]
  double epsilon_bottom = 0.0;
  double R_top = 0.0;

  Eigen::ArrayXd partial_sum(std::size_t k) const;  // layers 0..k
};

// Geometric scale edges eps * rho^k from eps up to R with rho close to 2^{1/4}, adjusted to land on R.
std::vector<double> layer_edges(double epsilon, double R, double rho = std::pow(2.0, 0.25));

// Spectral knob for the negative control: density c_d |zeta|^{-exponent}. exponent = d is the true LGF.
struct SpectralOptions {
  std::optional<double> exponent;
  bool anchor = true;
};

FieldSample sample_spectral_lgf(const GridSpec& grid, std::uint64_t seed, const SpectralOptions& opt = {});

void check_white_noise_params(const GridSpec& grid, double epsilon, double R);

FieldSample sample_white_noise_field(const GridSpec& grid, double epsilon, double R, const BumpSpectrum& bump,
                                     std::uint64_t seed);
FieldSample sample_white_noise_field(const GridSpec& grid, double epsilon, double R, const BumpProfile& bump,
                                     std::uint64_t seed);
LayerStack sample_white_noise_layers(const GridSpec& grid, double epsilon, double R, const BumpSpectrum& bump,
                                     std::uint64_t seed);

FieldSample mollify(const FieldSample& field, const RadialKernel& kernel);

// Precomputed convolution multiplier for repeated mollification on one grid.
class Mollifier {
 public:
  Mollifier(const GridSpec& grid, const RadialKernel& kernel);
  FieldSample apply(const FieldSample& field) const;
  double epsilon() const { return epsilon_; }

 private:
  std::shared_ptr<const GridFft> fft_;
  Eigen::ArrayXd multiplier_;
  double epsilon_;
};

// Kernel mass outside the ball of radius r, the part the torus convolution folds back.
double kernel_mass_beyond(const RadialKernel& kernel, double r);

// Multilinear interpolation on the periodic grid.
double interpolate(const FieldSample& field, const Eigen::VectorXd& x);

// Deterministic quadrature nodes on the unit sphere (d = 2: shifted equal angles, d = 3: Fibonacci lattice).
std::vector<Eigen::VectorXd> sphere_nodes(int d, int n);
int sphere_quadrature_size(int d, double radius, double spacing);

double sphere_average(const FieldSample& field, const Eigen::VectorXd& center, double radius);

// Sphere averages around every site at once, from the trigonometric interpolant of the grid values.
FieldSample sphere_average_field(const FieldSample& field, double radius);

// Subtracts h_radius(center); anchoring an anchored field again is a no-op up to rounding.
FieldSample anchor_field(FieldSample field, const Eigen::VectorXd& center, double radius = 1.0);

enum class TruncationMode { bar_sqrt_eps, hat_log_power };

struct TruncatedField {
  FieldSample field;
  double Z = 1.0;        // hat mode normaliser; 1 for bar mode
  double r_inner = 0.0;  // cutoff is 1 up to here
  double r_outer = 0.0;  // and 0 beyond here
  bool exact = false;    // cutoff covers the whole box, result equals mollify
};

std::pair<double, double> truncation_radii(double epsilon, TruncationMode mode);
// Smooth radial cutoff, 1 on [0, a], 0 on [b, inf).
double cutoff(double r, double a, double b);
// Z = int Psi K for the hat-mode cutoff.
double truncation_normaliser(const RadialKernel& kernel, double r_inner, double r_outer);

TruncatedField truncated_mollify(const FieldSample& field, const RadialKernel& kernel, TruncationMode mode);

struct RescaleReport {
  double r = 1.0;
  int ensemble = 0;
  std::vector<double> ks_statistic;
  std::vector<double> p_values;
  double min_p_bonferroni = 1.0;
  bool pass = false;
};

// Two-sample KS comparison of circle-average increments h_{r rho}(r x) - h_{r rho}(r y) against
// h_rho(x) - h_rho(y). The ensemble is split in halves so the two samples are independent.
RescaleReport rescale_field_check(const std::vector<FieldSample>& ensemble, double r, double rho = 0.25,
                                  double alpha = 1e-3);

}  // namespace lfpp
