#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <memory>

#include "lfpp/grid.hpp"

namespace lfpp {

// Real-to-complex transforms on a periodic grid (FFTW, deterministic ESTIMATE plans).
// Thread-safe: plans are created once per grid shape and executed on caller buffers.
class GridFft {
 public:
  explicit GridFft(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  std::int64_t spectrum_size() const { return spectrum_size_; }
  Eigen::ArrayXcd forward(const Eigen::ArrayXd& values) const;
  // Normalised inverse: inverse(forward(f)) == f.
  Eigen::ArrayXd inverse(Eigen::ArrayXcd spectrum) const;
  // |zeta| in cycles per unit length for each half-spectrum slot.
  const Eigen::ArrayXd& frequency_norms() const { return *norms_; }
  // Evaluates a radial multiplier m(|zeta|) on the half spectrum.
  Eigen::ArrayXd radial_multiplier(const std::function<double(double)>& m) const;
  // Circular convolution of values with a radial multiplier.
  Eigen::ArrayXd filter(const Eigen::ArrayXd& values, const Eigen::ArrayXd& multiplier) const;

 private:
  struct Plans;
  GridSpec grid_;
  std::int64_t spectrum_size_ = 0;
  std::shared_ptr<const Plans> plans_;
  std::shared_ptr<const Eigen::ArrayXd> norms_;
};

// Process-wide cache, one transform object per grid shape.
std::shared_ptr<const GridFft> shared_fft(const GridSpec& grid);

}  // namespace lfpp
