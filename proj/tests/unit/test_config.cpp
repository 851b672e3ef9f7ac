#include <doctest.h>

#include "lfpp/common.hpp"
#include "lfpp/config.hpp"

using namespace lfpp;

TEST_CASE("sha256 reference vectors") {
  CHECK(Config::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(Config::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("typed parsing") {
  const std::string text = "dimension: 2\nxi: 0.4\ngrid: 128\nepsilon_list: [0.2, 0.1]\nbump: steep\nwrite_path: true\n";
  const auto c = Config::parse(text);
  CHECK(c.integer("dimension") == 2);
  CHECK(c.real("xi") == 0.4);
  CHECK(c.reals("epsilon_list") == std::vector<double>{0.2, 0.1});
  CHECK(c.text("bump") == "steep");
  CHECK(c.boolean("write_path"));
  CHECK(c.real("epsilon", 0.05) == 0.05);
  CHECK_THROWS_AS(c.real("epsilon"), ValidationError);
  CHECK(c.hash() == Config::sha256_hex(text));
  CHECK(config_grid(c).n == 128);
  CHECK(config_grid(c).spacing == doctest::Approx(4.0 / 128));
  CHECK(config_bump(c) == BumpKind::steep);
}

TEST_CASE("integers are accepted where reals are expected") {
  const auto c = Config::parse("epsilon: 1\n");
  CHECK(c.real("epsilon") == 1.0);
}

TEST_CASE("strictness") {
  CHECK_THROWS_AS(Config::parse("dimensoin: 2\n"), ValidationError);
  CHECK_THROWS_AS(Config::parse("grid: many\n"), ValidationError);
  CHECK_THROWS_AS(Config::parse("grid: 1.5\n"), ValidationError);
  CHECK_THROWS_AS(Config::parse("epsilon_list: 0.1\n"), ValidationError);
  CHECK_THROWS_AS(Config::parse("a: [1\n"), ValidationError);
  CHECK_THROWS_AS(Config::load("/nonexistent/config.yaml"), ValidationError);
}

TEST_CASE("coupling parameters") {
  const auto bm = config_params(Config::parse("dimension: 2\n"));
  CHECK(bm.xi == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(bm.Q == doctest::Approx(5.0 / std::sqrt(6.0)));
  CHECK(bm.xi * bm.Q == doctest::Approx(5.0 / 6.0));
  const auto g = config_params(Config::parse("gamma: 1.632993161855452\n"));
  CHECK(g.d_gamma == doctest::Approx(4.0));
  CHECK_THROWS_AS(config_params(Config::parse("gamma: 1.0\n")), ValidationError);
  const auto both = config_params(Config::parse("gamma: 1.0\nxi: 0.3\n"));
  // Q = d / gamma + gamma / 2
  CHECK(both.Q == doctest::Approx(2.5));
}
