#include "lfpp/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "lfpp/common.hpp"

namespace lfpp {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

class Out {
 public:
  explicit Out(const fs::path& p) : f_(p, std::ios::binary | std::ios::trunc) {
    if (!f_) throw Error("cannot open " + p.string() + " for writing");
  }
  template <class T>
  void put(T v) {
    f_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const char* s, std::size_t n) { f_.write(s, static_cast<std::streamsize>(n)); }
  void doubles(const Eigen::ArrayXd& v) {
    put<std::uint64_t>(v.size());
    f_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void close() {
    f_.close();
    if (!f_) throw Error("write failed");
  }

 private:
  std::ofstream f_;
};

class In {
 public:
  explicit In(const fs::path& p) : f_(p, std::ios::binary), name_(p.string()) {
    if (!f_) throw ValidationError("cannot open " + name_);
  }
  template <class T>
  T get() {
    T v;
    f_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f_) throw ValidationError("truncated file " + name_);
    return v;
  }
  void magic(const char* m) {
    char buf[4];
    f_.read(buf, 4);
    if (!f_ || std::memcmp(buf, m, 4) != 0) throw ValidationError(name_ + " is not a " + std::string(m, 4) + " file");
  }
  Eigen::ArrayXd doubles() {
    const auto n = get<std::uint64_t>();
    if (n > (std::uint64_t{1} << 32)) throw ValidationError("implausible array length in " + name_);
    Eigen::ArrayXd v(n);
    f_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!f_) throw ValidationError("truncated file " + name_);
    return v;
  }

 private:
  std::ifstream f_;
  std::string name_;
};

}  // namespace

void write_kernel_lfpk(const fs::path& path, const RadialKernel& kernel) {
  Out o(path);
  o.bytes("LFPK", 4);
  o.put<std::uint32_t>(1);
  o.put<std::uint32_t>(kernel.d);
  o.put<double>(kernel.epsilon);
  const auto& grid = kernel.profile.grid();
  const auto& v = kernel.profile.values();
  o.put<std::uint64_t>(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    o.put<double>(grid.at(i));
    o.put<double>(v[i]);
  }
  o.close();
}

KernelDump read_kernel_lfpk(const fs::path& path) {
  In in(path);
  in.magic("LFPK");
  KernelDump k;
  k.version = in.get<std::uint32_t>();
  k.d = in.get<std::uint32_t>();
  k.epsilon = in.get<double>();
  const auto n = in.get<std::uint64_t>();
  if (n > (1u << 28)) throw ValidationError("implausible LFPK length");
  k.pairs.resize(n);
  for (auto& p : k.pairs) {
    p.first = in.get<double>();
    p.second = in.get<double>();
  }
  return k;
}

void write_kernel_csv(const fs::path& path, const RadialKernel& kernel) {
  Csv w({"r", "K(r)"});
  const auto& grid = kernel.profile.grid();
  for (int i = 0; i < grid.n; ++i) w.row({grid.at(i), kernel.profile.values()[i]});
  w.save(path);
}

void write_field_lfpf(const fs::path& path, const FieldSample& f) {
  Out o(path);
  o.bytes("LFPF", 4);
  o.put<std::uint32_t>(1);
  o.put<std::uint32_t>(f.grid.d);
  o.put<std::uint32_t>(f.grid.n);
  o.put<double>(f.grid.spacing);
  o.put<double>(f.epsilon);
  o.put<std::uint8_t>(static_cast<std::uint8_t>(f.sampler));
  o.put<std::uint64_t>(f.seed);
  o.bytes(reinterpret_cast<const char*>(f.values.data()), f.values.size() * sizeof(double));
  o.close();
}

FieldSample read_field_lfpf(const fs::path& path) {
  In in(path);
  in.magic("LFPF");
  if (in.get<std::uint32_t>() != 1) throw ValidationError("unsupported LFPF version");
  FieldSample f;
  f.grid.d = static_cast<int>(in.get<std::uint32_t>());
  f.grid.n = static_cast<int>(in.get<std::uint32_t>());
  f.grid.spacing = in.get<double>();
  f.grid.validate();
  f.epsilon = in.get<double>();
  const auto s = in.get<std::uint8_t>();
  if (s != 1 && s != 2) throw ValidationError("unknown sampler id in LFPF");
  f.sampler = static_cast<Sampler>(s);
  f.seed = in.get<std::uint64_t>();
  f.values.resize(f.grid.sites());
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = in.get<double>();
  return f;
}

void write_kernel_cache(const fs::path& path, const RadialKernel& k) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    Out o(tmp);
    o.bytes("LFPC", 4);
    o.put<std::uint32_t>(1);
    o.put<std::uint32_t>(k.d);
    o.put<double>(k.epsilon);
    for (const RadialTable* t : {&k.profile, &k.spectrum}) {
      o.put<double>(t->grid().lo);
      o.put<double>(t->grid().hi);
      o.put<std::int32_t>(t->grid().n);
      o.doubles(t->values());
      o.put<double>(t->tail().from);
      o.put<double>(t->tail().amplitude);
      o.put<double>(t->tail().power);
    }
    o.put<double>(k.spectrum_fine.step());
    o.doubles(k.spectrum_fine.values());
    o.put<double>(k.mass);
    o.put<double>(k.decay_constant);
    o.close();
  }
  fs::rename(tmp, path);
}

RadialKernel read_kernel_cache(const fs::path& path) {
  In in(path);
  in.magic("LFPC");
  if (in.get<std::uint32_t>() != 1) throw ValidationError("unsupported kernel cache version");
  RadialKernel k;
  k.d = static_cast<int>(in.get<std::uint32_t>());
  k.epsilon = in.get<double>();
  for (RadialTable* t : {&k.profile, &k.spectrum}) {
    LogGrid g;
    g.lo = in.get<double>();
    g.hi = in.get<double>();
    g.n = in.get<std::int32_t>();
    Eigen::ArrayXd v = in.doubles();
    PowerTail tail;
    tail.from = in.get<double>();
    tail.amplitude = in.get<double>();
    tail.power = in.get<double>();
    *t = RadialTable(k.d, g, std::move(v), tail);
  }
  const double step = in.get<double>();
  k.spectrum_fine = UniformTable(step, in.doubles());
  k.mass = in.get<double>();
  k.decay_constant = in.get<double>();
  return k;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, end);
}

Csv::Csv(const std::vector<std::string>& header) { row(header); }

void Csv::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

void Csv::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
  text_ += '\n';
}

void Csv::save(const fs::path& path) const { write_text(path, text_); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace lfpp
