#include <CLI11.hpp>

#include <cstdio>
#include <vector>

#include "lfpp/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lfpp acceptance suite"};
  std::vector<int> ids;
  std::string out_dir;
  std::uint64_t seed = lfpp::kAcceptanceSeed;
  app.add_option("-c,--criterion", ids, "criteria to run (default: all)")->check(CLI::Range(1, lfpp::kCriteria));
  app.add_option("--out-dir", out_dir, "artifact directory");
  app.add_option("--seed", seed, "pinned base seed");
  CLI11_PARSE(app, argc, argv);
  if (ids.empty())
    for (int i = 1; i <= lfpp::kCriteria; ++i) ids.push_back(i);
  lfpp::AcceptanceOptions opt;
  opt.out_dir = out_dir;
  opt.seed = seed;
  bool ok = true;
  for (int id : ids) {
    const auto r = lfpp::run_criterion(id, opt);
    std::printf("%s\n", lfpp::result_line(r).c_str());
    std::fflush(stdout);
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}
