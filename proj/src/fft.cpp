#include "lfpp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace lfpp {

namespace {
// FFTW planning is not thread-safe; execution on new arrays is.
// Leaked on purpose so cached plans can still lock it during static destruction.
std::mutex& planner_mutex() {
  static auto* m = new std::mutex;
  return *m;
}
}  // namespace

struct GridFft::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

GridFft::GridFft(const GridSpec& grid) : grid_(grid) {
  grid_.validate(std::int64_t{1} << 30);
  std::vector<int> dims(grid_.d, grid_.n);
  spectrum_size_ = grid_.sites() / grid_.n * (grid_.n / 2 + 1);

  auto plans = std::make_shared<Plans>();
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    double* rbuf = fftw_alloc_real(grid_.sites());
    fftw_complex* cbuf = fftw_alloc_complex(spectrum_size_);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans->r2c = fftw_plan_dft_r2c(grid_.d, dims.data(), rbuf, cbuf, flags);
    plans->c2r = fftw_plan_dft_c2r(grid_.d, dims.data(), cbuf, rbuf, flags);
    fftw_free(rbuf);
    fftw_free(cbuf);
  }
  plans_ = plans;

  const int n = grid_.n, h = n / 2 + 1;
  const double L = grid_.side();
  auto norms = std::make_shared<Eigen::ArrayXd>(spectrum_size_);
  auto freq = [&](int k) { return (k < n / 2 ? k : k - n) / L; };
  std::int64_t s = 0;
  if (grid_.d == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < h; ++j, ++s) (*norms)[s] = std::hypot(freq(i), j / L);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < h; ++k, ++s) {
          const double a = freq(i), b = freq(j), c = k / L;
          (*norms)[s] = std::sqrt(a * a + b * b + c * c);
        }
  }
  norms_ = norms;
}

Eigen::ArrayXcd GridFft::forward(const Eigen::ArrayXd& values) const {
  Eigen::ArrayXd in = values;  // r2c may scribble on its input for some plans
  Eigen::ArrayXcd out(spectrum_size_);
  fftw_execute_dft_r2c(plans_->r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::ArrayXd GridFft::inverse(Eigen::ArrayXcd spectrum) const {
  Eigen::ArrayXd out(grid_.sites());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
  out /= static_cast<double>(grid_.sites());
  return out;
}

Eigen::ArrayXd GridFft::radial_multiplier(const std::function<double(double)>& m) const {
  const Eigen::ArrayXd& z = *norms_;
  Eigen::ArrayXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = m(z[i]);
  return out;
}

Eigen::ArrayXd GridFft::filter(const Eigen::ArrayXd& values, const Eigen::ArrayXd& multiplier) const {
  Eigen::ArrayXcd spec = forward(values);
  spec *= multiplier;
  return inverse(std::move(spec));
}

std::shared_ptr<const GridFft> shared_fft(const GridSpec& grid) {
  static std::mutex m;
  static std::map<std::tuple<int, int, double>, std::shared_ptr<const GridFft>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[{grid.d, grid.n, grid.spacing}];
  if (!slot) slot = std::make_shared<GridFft>(grid);
  return slot;
}

}  // namespace lfpp
