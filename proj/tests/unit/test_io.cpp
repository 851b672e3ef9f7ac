#include <doctest.h>

#include <filesystem>
#include <limits>

#include "lfpp/common.hpp"
#include "lfpp/io.hpp"
#include "lfpp/pipeline.hpp"

using namespace lfpp;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "lfpp_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("LFPF roundtrip") {
  GridSpec g;
  g.n = 32;
  g.spacing = 0.125;
  const auto f = sample_spectral_lgf(g, 77);
  const auto p = scratch("f.lfpf");
  write_field_lfpf(p, f);
  const auto r = read_field_lfpf(p);
  CHECK(r.grid == g);
  CHECK(r.seed == 77);
  CHECK(r.sampler == Sampler::spectral);
  CHECK((r.values == f.values).all());
  CHECK(fs::file_size(p) == 4 + 4 + 4 + 4 + 8 + 8 + 1 + 8 + 8 * 32 * 32);
  write_text(p, "LFPX garbage");
  CHECK_THROWS(read_field_lfpf(p));
}

TEST_CASE("LFPK and kernel cache roundtrip") {
  const auto k = KernelCache::global().kernel(2, BumpKind::canonical, 0.1);
  const auto p = scratch("k.lfpk");
  write_kernel_lfpk(p, *k);
  const auto dump = read_kernel_lfpk(p);
  CHECK(dump.d == 2);
  CHECK(dump.epsilon == 0.1);
  REQUIRE(dump.pairs.size() == static_cast<std::size_t>(k->radius_grid().size()));
  for (std::size_t i = 0; i < dump.pairs.size(); i += 97) {
    CHECK(dump.pairs[i].first == k->radius_grid()[i]);
    CHECK(dump.pairs[i].second == k->values()[i]);
  }
  const auto c = scratch("k.cache");
  write_kernel_cache(c, *k);
  const auto back = read_kernel_cache(c);
  CHECK(back.mass == k->mass);
  for (double r : {0.0, 0.05, 0.13}) CHECK(back(r) == (*k)(r));
  for (double z : {0.0, 3.0, 40.0}) CHECK(back.spectrum_at(z) == k->spectrum_at(z));
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
  Csv csv({"a", "b"});
  csv.row(std::vector<double>{1.0, 0.25});
  CHECK(csv.str() == "a,b\n1,0.25\n");
}
