#include "lfpp/pipeline.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>

#include "lfpp/io.hpp"
#include "lfpp/version.hpp"

namespace lfpp {

std::optional<std::filesystem::path> kernel_cache_dir() {
  const char* v = std::getenv("LFPP_CACHE_DIR");
  if (!v || !*v) return std::nullopt;
  return std::filesystem::path(v);
}

KernelCache& KernelCache::global() {
  static KernelCache cache;
  return cache;
}

std::shared_ptr<const BumpSpectrum> KernelCache::spectrum(int d, BumpKind kind) {
  std::lock_guard lock(mutex_);
  auto& slot = spectra_[{d, kind}];
  if (!slot) slot = std::make_shared<const BumpSpectrum>(make_bump(d, kind));
  return slot;
}

std::shared_ptr<const RadialKernel> KernelCache::kernel(int d, BumpKind kind, double epsilon) {
  {
    std::lock_guard lock(mutex_);
    auto it = kernels_.find({d, kind, epsilon});
    if (it != kernels_.end()) return it->second;
  }
  std::optional<std::filesystem::path> file;
  if (auto dir = kernel_cache_dir()) {
    char name[96];
    std::snprintf(name, sizeof(name), "lfpc_%s_d%d_%s_%016llx.bin", kCodeVersion, d, to_string(kind).c_str(),
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(epsilon)));
    file = *dir / name;
  }
  std::shared_ptr<const RadialKernel> k;
  if (file && std::filesystem::exists(*file)) {
    try {
      auto loaded = read_kernel_cache(*file);
      if (loaded.d == d && loaded.epsilon == epsilon) k = std::make_shared<const RadialKernel>(std::move(loaded));
    } catch (const ValidationError&) {
      // unreadable cache entry, rebuilt below
    }
  }
  if (!k) {
    auto spec = spectrum(d, kind);
    k = std::make_shared<const RadialKernel>(build_kernel(epsilon, *spec));
    if (file) {
      std::filesystem::create_directories(file->parent_path());
      write_kernel_cache(*file, *k);
    }
  }
  std::lock_guard lock(mutex_);
  return kernels_.try_emplace({d, kind, epsilon}, k).first->second;
}

std::shared_ptr<const Mollifier> shared_mollifier(const GridSpec& grid, BumpKind kind, double epsilon) {
  using Key = std::tuple<int, int, double, BumpKind, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const Mollifier>> cache;
  const Key key{grid.d, grid.n, grid.spacing, kind, epsilon};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto kernel = KernelCache::global().kernel(grid.d, kind, epsilon);
  auto m = std::make_shared<const Mollifier>(grid, *kernel);
  std::lock_guard lock(mutex);
  return cache.try_emplace(key, m).first->second;
}

void EnsembleSpec::validate(int min_size) const {
  grid.validate();
  if (size < min_size) throw ValidationError("ensemble size " + std::to_string(size) + " below minimum " +
                                             std::to_string(min_size));
  if (size > kMaxEnsemble) throw ResourceError("ensemble size above cap " + std::to_string(kMaxEnsemble));
}

FieldSample ensemble_field(const EnsembleSpec& spec, int i) { return sample_spectral_lgf(spec.grid, spec.seed(i)); }

}  // namespace lfpp
