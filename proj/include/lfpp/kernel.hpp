#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "lfpp/common.hpp"
#include "lfpp/radial.hpp"

namespace lfpp {

// canonical: exp(-1/(1-s^2)); steep: exp(-1/(1-s^2)^2), flatter top and faster edge decay.
enum class BumpKind { canonical, steep };

std::string to_string(BumpKind kind);
BumpKind parse_bump_kind(const std::string& name);

// Radial seed bump with compact support. amplitude * shape(r / support_radius).
struct BumpProfile {
  int d = 2;
  BumpKind kind = BumpKind::canonical;
  double support_radius = 1.0;
  double amplitude = 1.0;
  Eigen::ArrayXd radius_grid;
  Eigen::ArrayXd values;

  double operator()(double r) const;
};

double bump_shape(BumpKind kind, double s);

// Amplitude chosen numerically so that the L2 norm is one, unless given explicitly.
BumpProfile make_bump(int d, BumpKind kind = BumpKind::canonical, double support_radius = 1.0,
                      std::optional<double> amplitude = std::nullopt);

// Integral of bump(|x|)^2 over R^d.
double bump_l2_squared(const BumpProfile& bump);

// Throws ValidationError on a broken profile (normalisation, support, smoothness).
void validate_bump(const BumpProfile& bump);

// Fourier transform of a compactly supported radial bump plus its cumulative scale integrals
// I(u) = int_u^inf s^{d-1} |Khat(s)|^2 ds and J(u) = int_0^u (same integrand).
// Khat oscillates with period ~ 1/support, so it is held on a fine uniform grid.
class BumpSpectrum {
 public:
  explicit BumpSpectrum(const BumpProfile& bump);
  BumpSpectrum(const std::function<double(double)>& f, int d, double support);

  int dimension() const { return d_; }
  double khat(double rho) const { return khat_(rho); }
  double khat0() const { return khat_.values()[0]; }
  const UniformTable& khat_table() const { return khat_; }
  // Export on a log grid (the RadialSpectrum view).
  RadialTable tabulate(const LogGrid& grid) const;

  double upper(double u) const;
  double lower(double u) const;
  // int_a^b s^{d-1} |Khat(s)|^2 ds for 0 <= a <= b, picking the better-conditioned side.
  double band(double a, double b) const;
  double total() const { return total_; }
  double t_max() const { return t_max_; }
  double tail_certificate() const { return tail_certificate_; }

 private:
  double piece(int j, double u) const;  // integral from node j to u

  int d_ = 2;
  UniformTable khat_;
  Eigen::ArrayXd upper_;
  Eigen::ArrayXd lower_;
  double total_ = 0.0;
  double t_max_ = 0.0;
  double tail_certificate_ = 0.0;
};

// kappa_hat_eps(zeta) = int_eps^R t^{d-1} |Khat(t zeta)|^2 dt. R defaults to infinity; zeta = 0 needs finite R.
double kappa_hat_value(double epsilon, double zeta, const BumpSpectrum& spectrum,
                       double R = std::numeric_limits<double>::infinity());

// kappa_hat_eps tabulated on the log grid scaled by 1/eps.
RadialTable kappa_hat(double epsilon, const BumpSpectrum& spectrum);

struct RadialKernel {
  double epsilon = 0.0;
  int d = 2;
  RadialTable profile;   // K_eps(r)
  RadialTable spectrum;  // Khat_eps(zeta) on the log grid, equal to 1 at zeta = 0
  UniformTable spectrum_fine;  // same function on a uniform grid, used for evaluation
  double mass = 0.0;
  double decay_constant = 0.0;

  double operator()(double r) const { return profile(r); }
  double spectrum_at(double zeta) const { return spectrum_fine(zeta); }
  Eigen::ArrayXd radius_grid() const { return profile.grid().nodes(); }
  const Eigen::ArrayXd& values() const { return profile.values(); }
};

RadialKernel build_kernel(double epsilon, const BumpSpectrum& spectrum);
RadialKernel build_kernel(double epsilon, const BumpProfile& bump);

// Covariance of the white-noise field truncated to scales [eps, R] at offset |x|.
double kappa_exact(double epsilon, double R, double x, const BumpSpectrum& spectrum);
double kappa_exact(double epsilon, double R, const Eigen::VectorXd& x, const BumpSpectrum& spectrum);

// 2 (kappa(0) - kappa(x)) for scales [eps, R]; R may be infinite.
double kappa_structure(double epsilon, double R, double x, const BumpSpectrum& spectrum);

}  // namespace lfpp
