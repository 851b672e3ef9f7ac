#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lfpp/grid.hpp"
#include "lfpp/kernel.hpp"
#include "lfpp/metric.hpp"

namespace lfpp {

enum class ValueType { integer, real, text, boolean, integer_list, real_list };

struct KeySpec {
  std::string name;
  ValueType type;
  std::string help;
};

// Every key any subcommand understands. Anything else in a config file is rejected.
const std::vector<KeySpec>& config_schema();

using ConfigValue = std::variant<std::int64_t, double, std::string, bool, std::vector<std::int64_t>, std::vector<double>>;

// Flat key/value config (YAML syntax, scalars and flow lists only), typed against the schema.
class Config {
 public:
  Config() : hash_(sha256_hex("")) {}
  static Config parse(const std::string& text, const std::vector<KeySpec>& schema = config_schema());
  static Config load(const std::filesystem::path& path, const std::vector<KeySpec>& schema = config_schema());

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) const;
  double real(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::vector<std::int64_t> integers(const std::string& key,
                                     std::optional<std::vector<std::int64_t>> fallback = std::nullopt) const;
  std::vector<double> reals(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) const;

  void set(const std::string& key, ConfigValue v) { values_[key] = std::move(v); }
  const std::map<std::string, ConfigValue>& values() const { return values_; }
  // SHA-256 of the config file bytes, lowercase hex.
  const std::string& hash() const { return hash_; }

  static std::string sha256_hex(const std::string& bytes);

 private:
  const ConfigValue& at(const std::string& key) const;
  std::map<std::string, ConfigValue> values_;
  std::string hash_;
};

// Shared readers for the keys most commands use.
GridSpec config_grid(const Config& c, int default_n = 256, double default_side = 4.0);
CouplingParams config_params(const Config& c);
BumpKind config_bump(const Config& c);

}  // namespace lfpp
