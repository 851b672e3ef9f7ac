#include "lfpp/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>

#include "lfpp/io.hpp"

namespace lfpp {

const std::vector<KeySpec>& config_schema() {
  using T = ValueType;
  static const std::vector<KeySpec> schema = {
      {"dimension", T::integer, "spatial dimension d (2 or 3)"},
      {"gamma", T::real, "coupling gamma"},
      {"xi", T::real, "metric exponent xi"},
      {"grid", T::integer, "sites per axis (power of two)"},
      {"box_side", T::real, "physical side L of the periodic box"},
      {"bump", T::text, "seed bump: canonical | steep"},
      {"bump_amplitude", T::real, "override of the bump amplitude (normally fixed by the L2 norm)"},
      {"epsilon", T::real, "mollification scale"},
      {"epsilon_list", T::real_list, "mollification scales for exponent fits"},
      {"R", T::real, "top scale of the white-noise field"},
      {"sampler", T::text, "spectral | white_noise_layers"},
      {"truncation", T::text, "none | bar_sqrt_eps | hat_log_power"},
      {"r_list", T::real_list, "dyadic scales r"},
      {"seeds", T::integer, "base seed; member i of an ensemble uses seeds + i"},
      {"ensemble_size", T::integer, "number of independent fields"},
      {"stencil", T::text, "moore | von_neumann"},
      {"query", T::text, "point_point | across | around"},
      {"src", T::real_list, "source point"},
      {"dst", T::real_list, "target point"},
      {"shell_inner", T::real, "inner shell radius"},
      {"shell_outer", T::real, "outer shell radius"},
      {"n_rays", T::integer, "rays for the around-distance surrogate"},
      {"write_path", T::boolean, "dump the geodesic site list"},
      {"write_fields", T::boolean, "dump sampled fields as LFPF"},
      {"xi_q_offset", T::real, "added to xi Q in the c_r negative control"},
      {"p_list", T::real_list, "moment orders"},
      {"moment_kind", T::text, "point_point | set_set | diameter"},
      {"holder_scales", T::real_list, "dyadic separations for the Holder fit"},
      {"pairs_per_seed", T::integer, "base points per field in the Holder fit"},
      {"alpha", T::real, "thickness level"},
      {"window_u", T::real, "thick-point window"},
      {"epsilon_probe", T::real, "smallest thick-point scale"},
      {"target", T::text, "KPZ target set: box | segment | cantor"},
      {"max_centers", T::integer, "cap on greedy covering centres"},
      {"radii", T::real_list, "shell radii for the correlation probe"},
      {"drift_list", T::real_list, "drifts a"},
      {"horizon_T", T::real, "simulation horizon"},
      {"dt", T::real, "time step"},
      {"n_samples", T::integer, "Monte Carlo paths"},
      {"y_list", T::real_list, "sup-tail thresholds"},
      {"x_list", T::real_list, "exponential-integral thresholds"},
      {"bridge_correction", T::boolean, "restore the within-step maximum"},
      {"criteria", T::integer_list, "acceptance criteria to run"},
      {"medians_file", T::text, "CSV of epsilon,median pairs to fit instead of simulating"},
  };
  return schema;
}

std::string Config::sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

namespace {

template <class T>
T scalar_as(const YAML::Node& n, const std::string& key, const char* what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError("config key '" + key + "' must be " + what);
  }
}

ConfigValue convert(const YAML::Node& n, const KeySpec& spec) {
  const bool list = spec.type == ValueType::integer_list || spec.type == ValueType::real_list;
  if (list != n.IsSequence() || (!list && !n.IsScalar()))
    throw ValidationError("config key '" + spec.name + "' must be " + (list ? "a list" : "a scalar"));
  switch (spec.type) {
    case ValueType::integer:
      return scalar_as<std::int64_t>(n, spec.name, "an integer");
    case ValueType::real: {
      const double v = scalar_as<double>(n, spec.name, "a number");
      if (!std::isfinite(v)) throw ValidationError("config key '" + spec.name + "' must be finite");
      return v;
    }
    case ValueType::text:
      return scalar_as<std::string>(n, spec.name, "a string");
    case ValueType::boolean:
      return scalar_as<bool>(n, spec.name, "true or false");
    case ValueType::integer_list: {
      std::vector<std::int64_t> v;
      for (const auto& e : n) v.push_back(scalar_as<std::int64_t>(e, spec.name, "a list of integers"));
      return v;
    }
    case ValueType::real_list: {
      std::vector<double> v;
      for (const auto& e : n) {
        v.push_back(scalar_as<double>(e, spec.name, "a list of numbers"));
        if (!std::isfinite(v.back())) throw ValidationError("config key '" + spec.name + "' must be finite");
      }
      return v;
    }
  }
  throw ValidationError("unhandled type for " + spec.name);
}

}  // namespace

Config Config::parse(const std::string& text, const std::vector<KeySpec>& schema) {
  Config c;
  c.hash_ = sha256_hex(text);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ValidationError("config must be a flat key: value map");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const KeySpec* spec = nullptr;
    for (const auto& s : schema)
      if (s.name == key) spec = &s;
    if (!spec) throw ValidationError("unknown config key '" + key + "'");
    if (c.values_.count(key)) throw ValidationError("duplicate config key '" + key + "'");
    c.values_[key] = convert(kv.second, *spec);
  }
  return c;
}

Config Config::load(const std::filesystem::path& path, const std::vector<KeySpec>& schema) {
  if (!std::filesystem::exists(path)) throw ValidationError("config file not found: " + path.string());
  return parse(read_text(path), schema);
}

const ConfigValue& Config::at(const std::string& key) const { return values_.at(key); }

std::int64_t Config::integer(const std::string& key, std::optional<std::int64_t> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ValidationError("missing config key '" + key + "'");
  }
  return std::get<std::int64_t>(at(key));
}

double Config::real(const std::string& key, std::optional<double> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ValidationError("missing config key '" + key + "'");
  }
  return std::get<double>(at(key));
}

std::string Config::text(const std::string& key, std::optional<std::string> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ValidationError("missing config key '" + key + "'");
  }
  return std::get<std::string>(at(key));
}

bool Config::boolean(const std::string& key, std::optional<bool> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ValidationError("missing config key '" + key + "'");
  }
  return std::get<bool>(at(key));
}

std::vector<std::int64_t> Config::integers(const std::string& key,
                                           std::optional<std::vector<std::int64_t>> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ValidationError("missing config key '" + key + "'");
  }
  return std::get<std::vector<std::int64_t>>(at(key));
}

std::vector<double> Config::reals(const std::string& key, std::optional<std::vector<double>> fallback) const {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ValidationError("missing config key '" + key + "'");
  }
  return std::get<std::vector<double>>(at(key));
}

GridSpec config_grid(const Config& c, int default_n, double default_side) {
  GridSpec g;
  g.d = static_cast<int>(c.integer("dimension", 2));
  g.n = static_cast<int>(c.integer("grid", default_n));
  g.spacing = c.real("box_side", default_side) / g.n;
  g.validate();
  return g;
}

CouplingParams config_params(const Config& c) {
  const int d = static_cast<int>(c.integer("dimension", 2));
  if (c.has("gamma") && c.has("xi")) return CouplingParams::from_gamma_xi(d, c.real("gamma"), c.real("xi"));
  if (c.has("xi")) return CouplingParams::from_xi(d, c.real("xi"));
  if (c.has("gamma")) {
    // gamma alone pins xi only at the Brownian-map point
    if (d == 2 && std::abs(c.real("gamma") - std::sqrt(8.0 / 3.0)) < 1e-12)
      return CouplingParams::from_xi(2, 1.0 / std::sqrt(6.0));
    throw ValidationError("gamma alone does not determine xi here; give both gamma and xi");
  }
  if (d != 2) throw ValidationError("no default coupling for d = " + std::to_string(d) + "; give gamma and xi");
  return CouplingParams::from_xi(2, 1.0 / std::sqrt(6.0));
}

BumpKind config_bump(const Config& c) { return parse_bump_kind(c.text("bump", "canonical")); }

}  // namespace lfpp
