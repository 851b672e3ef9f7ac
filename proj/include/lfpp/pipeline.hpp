#pragma once

#include <tbb/parallel_for.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "lfpp/field.hpp"
#include "lfpp/grid.hpp"
#include "lfpp/kernel.hpp"

namespace lfpp {

// Directory named by LFPP_CACHE_DIR, if set and non-empty.
std::optional<std::filesystem::path> kernel_cache_dir();

// Kernel tabulations cost about a second each; keep one per (d, bump kind, epsilon) per process,
// and on disk under LFPP_CACHE_DIR when that is set. Only normalised bumps go through here.
class KernelCache {
 public:
  static KernelCache& global();

  std::shared_ptr<const BumpSpectrum> spectrum(int d, BumpKind kind);
  std::shared_ptr<const RadialKernel> kernel(int d, BumpKind kind, double epsilon);

 private:
  std::mutex mutex_;
  std::map<std::pair<int, BumpKind>, std::shared_ptr<const BumpSpectrum>> spectra_;
  std::map<std::tuple<int, BumpKind, double>, std::shared_ptr<const RadialKernel>> kernels_;
};

// Mollifier for (grid, bump, epsilon), built once per process.
std::shared_ptr<const Mollifier> shared_mollifier(const GridSpec& grid, BumpKind kind, double epsilon);

// Results land at their index, so the output does not depend on scheduling.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
  std::vector<T> out(n);
  tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

inline constexpr int kMaxEnsemble = 100000;

// Member i uses seed base_seed + i.
struct EnsembleSpec {
  GridSpec grid;
  int size = 100;
  std::uint64_t base_seed = 1;

  std::uint64_t seed(int i) const { return base_seed + static_cast<std::uint64_t>(i); }
  void validate(int min_size = 1) const;
};

// Anchored spectral LGF for member i.
FieldSample ensemble_field(const EnsembleSpec& spec, int i);

}  // namespace lfpp
