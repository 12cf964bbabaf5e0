#include <doctest.h>

#include "mpet/config.hpp"

using namespace mpet;

TEST_SUITE_BEGIN("config");

TEST_CASE("scalar and array values") {
  ConfigTable t = parse_config(R"(
# a comment
n = 2
mu = 1.5
name = "demo"
flag = true
K = [1.0, 1e-4]
nested = [[1, 2, 0.5]]
[grid]
lambda = [1, 1e4, 1e8]
)");
  CHECK(t.at("n").as_int() == 2);
  CHECK(t.at("mu").as_double() == doctest::Approx(1.5));
  CHECK(t.at("name").as_string() == "demo");
  CHECK(t.at("flag").as_bool());
  CHECK(t.at("K").as_double_vector() == std::vector<double>{1.0, 1e-4});
  CHECK(t.at("nested").as_array()[0].as_array()[2].as_double() == doctest::Approx(0.5));
  CHECK(t.at("grid.lambda").as_double_vector().size() == 3);
  CHECK(t.at("grid.lambda").as_double_vector()[1] == doctest::Approx(1e4));
}

TEST_CASE("parse errors carry line information") {
  CHECK_THROWS_WITH_AS(parse_config("x ="), doctest::Contains("line"), std::runtime_error);
  CHECK_THROWS_AS(parse_config("x = [1, 2"), std::runtime_error);
  CHECK_THROWS_AS(parse_config("x = oops"), std::runtime_error);
}

TEST_CASE("parameter files") {
  SUBCASE("defaults with overrides and broadcasting") {
    MpetParameters p = load_parameters(parse_config(R"(
n = 2
mu = 2.0
tau = 0.25
phi = 0.2
K = [1.0, 1e-6]
)"));
    CHECK(p.n == 2);
    CHECK(p.mu == doctest::Approx(2.0));
    CHECK(p.phi[0] == doctest::Approx(0.2));
    CHECK(p.phi[1] == doctest::Approx(0.2));
    CHECK(p.K[1] == doctest::Approx(1e-6));
  }
  SUBCASE("uniform transfer and pair overrides") {
    MpetParameters p = load_parameters(parse_config(R"(
n = 3
beta = 2.0
beta_pairs = [[1, 3, 5.0]]
)"));
    CHECK(p.beta_tilde(0, 1) == doctest::Approx(2.0));
    CHECK(p.beta_tilde(0, 2) == doctest::Approx(5.0));
    CHECK(p.beta_tilde(2, 0) == doctest::Approx(5.0));
    CHECK(p.beta_tilde(1, 1) == 0.0);
  }
  SUBCASE("validation failures surface the constraint") {
    CHECK_THROWS_WITH_AS(load_parameters(parse_config("n = 1\nphi = 1.4\n")),
                         doctest::Contains("phi_i"), std::invalid_argument);
    CHECK_THROWS_AS(load_parameters(parse_config("n = 2\nK = [1.0]\n")), std::runtime_error);
  }
}

TEST_CASE("sweep files") {
  SweepConfig cfg = load_sweep_config(parse_config(R"(
[sweep]
nx = 4
tol = 1e-8
seed = 11
jobs = 2
[grid]
mu = [1, 1e4]
lambda = [1, 1e4, 1e8]
n = [1, 2]
mesh = [4, 8]
)"));
  CHECK(cfg.nx == 4);
  CHECK(cfg.seed == 11);
  CHECK(cfg.jobs == 2);
  CHECK(cfg.mu.size() == 2);
  CHECK(cfg.lambda.size() == 3);
  CHECK(cfg.n == std::vector<int>{1, 2});
  CHECK(cfg.mesh == std::vector<int>{4, 8});
  CHECK(cfg.grid_size() == 2 * 3 * 2 * 2);
}

TEST_SUITE_END();
