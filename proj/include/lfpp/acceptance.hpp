#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lfpp {

inline constexpr int kCriteria = 10;
inline constexpr std::uint64_t kAcceptanceSeed = 20240611;

struct AcceptanceOptions {
  // Artifacts of criterion N are written to out_dir/cN when out_dir is set.
  std::filesystem::path out_dir;
  std::uint64_t seed = kAcceptanceSeed;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  // file name -> content; everything here must be a pure function of (code, seed)
  std::vector<std::pair<std::string, std::string>> artifacts;
  double seconds = 0.0;
};

std::string criterion_name(int id);

// Runs one criterion. Errors inside the criterion turn into a failed result.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

// "criterion N PASS|FAIL name: summary (T s)"
std::string result_line(const CriterionResult& r);

void save_artifacts(const CriterionResult& r, const std::filesystem::path& out_dir);

}  // namespace lfpp
