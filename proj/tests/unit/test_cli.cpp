#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "lfpp_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(LFPP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path write_config(const std::string& name, const std::string& yaml) {
  fs::create_directories(kDir);
  const auto p = kDir / name;
  std::ofstream(p) << yaml;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("cli exit codes") {
  CHECK(run("") == 1);
  CHECK(run("no-such-command") == 1);
  const auto bad = write_config("bad.yaml", "dimension: 2\nbump_amplitude: 1.41421356\nepsilon: 0.1\n");
  CHECK(run("build-kernel --config " + bad.string() + " --out-dir " + (kDir / "bad").string()) == 2);
  const auto unknown = write_config("unknown.yaml", "dimension: 2\nnot_a_key: 1\n");
  CHECK(run("build-kernel --config " + unknown.string() + " --out-dir " + (kDir / "unknown").string()) == 2);
}

TEST_CASE("cli outputs repeat byte for byte") {
  const auto cfg = write_config("k.yaml", "dimension: 2\nepsilon: 0.05\n");
  const auto a = kDir / "a", b = kDir / "b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(run("build-kernel --config " + cfg.string() + " --out-dir " + a.string()) == 0);
  REQUIRE(run("build-kernel --config " + cfg.string() + " --out-dir " + b.string()) == 0);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    if (name == "manifest.json") continue;  // timestamps
    CHECK(slurp(e.path()) == slurp(b / name));
    ++compared;
  }
  CHECK(compared >= 2);
}
