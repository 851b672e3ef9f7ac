#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lfpp/field.hpp"
#include "lfpp/kernel.hpp"

namespace lfpp {

namespace fs = std::filesystem;

// LFPK: "LFPK", u32 version, u32 d, f64 epsilon, u64 n, then n (r, K(r)) f64 pairs, little-endian.
struct KernelDump {
  std::uint32_t version = 1;
  std::uint32_t d = 2;
  double epsilon = 0.0;
  std::vector<std::pair<double, double>> pairs;
};

void write_kernel_lfpk(const fs::path& path, const RadialKernel& kernel);
KernelDump read_kernel_lfpk(const fs::path& path);
void write_kernel_csv(const fs::path& path, const RadialKernel& kernel);

// LFPF: "LFPF", u32 version, u32 d, u32 n_per_axis, f64 spacing, f64 epsilon, u8 sampler, u64 seed,
// then n^d f64 values in row-major order.
void write_field_lfpf(const fs::path& path, const FieldSample& field);
FieldSample read_field_lfpf(const fs::path& path);

// Complete kernel (profile and spectrum tables) for the on-disk tabulation cache.
void write_kernel_cache(const fs::path& path, const RadialKernel& kernel);
RadialKernel read_kernel_cache(const fs::path& path);

// CSV text builder; numbers printed with round-trip precision.
class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return text_; }
  void save(const fs::path& path) const;

 private:
  std::string text_;
};

std::string format_double(double v);
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace lfpp
