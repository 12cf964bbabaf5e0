#include <doctest.h>

#include <algorithm>

#include "mpet/verify.hpp"

using namespace mpet;

TEST_SUITE_BEGIN("verify");

TEST_CASE("identity hook sanity point") {
  SweepConfig cfg;
  cfg.nx = 2;
  cfg.identity_hook = true;
  auto rows = sweep(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].ok);
  CHECK(rows[0].kappa == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rows[0].iterations <= 1);
}

TEST_CASE("lambda robustness on a coarse mesh") {
  SweepConfig cfg;
  cfg.nx = 2;
  cfg.lambda = {1.0, 1e4, 1e8};
  cfg.n = {2};
  auto rows = sweep(cfg);
  REQUIRE(rows.size() == 3);
  double lo = 1e300, hi = 0.0;
  for (const auto& r : rows) {
    CHECK(r.ok);
    CHECK(r.min_xi > 0.0);
    CHECK(r.converged);
    lo = std::min(lo, r.kappa);
    hi = std::max(hi, r.kappa);
  }
  CHECK(hi / lo <= 10.0);
}

TEST_CASE("iteration counts are stable across network counts") {
  SweepConfig cfg;
  cfg.nx = 2;
  cfg.n = {1, 2, 4};
  cfg.run_spectrum = false;
  auto rows = sweep(cfg);
  REQUIRE(rows.size() == 3);
  int lo = 1 << 30, hi = 0;
  for (const auto& r : rows) {
    CHECK(r.converged);
    lo = std::min(lo, r.iterations);
    hi = std::max(hi, r.iterations);
  }
  CHECK(hi <= 2 * lo);
}

TEST_CASE("per-point failures do not abort the sweep") {
  SweepConfig cfg;
  cfg.nx = 2;
  cfg.c_p = {-1.0, 1.0};  // first point violates the parameter invariants
  auto rows = sweep(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(!rows[0].ok);
  CHECK(rows[0].error.find("c_p") != std::string::npos);
  CHECK(rows[1].ok);
}

TEST_CASE("sweep is deterministic and job-count independent") {
  SweepConfig cfg;
  cfg.nx = 2;
  cfg.lambda = {1.0, 1e4};
  cfg.n = {1, 2};
  auto csv1 = sweep_csv(sweep(cfg));
  auto csv2 = sweep_csv(sweep(cfg));
  CHECK(csv1 == csv2);
  cfg.jobs = 3;
  auto csv3 = sweep_csv(sweep(cfg));
  CHECK(csv1 == csv3);
}

TEST_CASE("fem constants across meshes") {
  auto rows = measure_fem_constants({2, 4, 8}, 10.0);
  REQUIRE(rows.size() == 3);

  auto spread_of = [&](auto get) {
    std::vector<double> vals;
    for (const auto& r : rows) vals.push_back(get(r));
    return relative_spread(vals);
  };

  for (const auto& r : rows) {
    CHECK(r.alpha_a > 0.0);
    CHECK(r.beta_s > 0.0);
    CHECK(r.beta_v > 0.0);
    CHECK(r.c3 > 0.0);
    CHECK(r.c2 >= 1.0);  // a_h contains the h-norm at eta >= 1
    // mutual optimal constants of the same norm pair multiply to one
    CHECK(r.c0 * r.c1 == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(spread_of([](const FemConstants& r) { return r.alpha_a; }) < 0.3);
  CHECK(spread_of([](const FemConstants& r) { return r.beta_v; }) < 0.3);
  CHECK(spread_of([](const FemConstants& r) { return r.beta_s; }) < 0.3);
  CHECK(spread_of([](const FemConstants& r) { return r.c3; }) < 0.3);
  CHECK(spread_of([](const FemConstants& r) { return r.c2; }) < 0.3);
}

TEST_CASE("csv format is stable") {
  SweepConfig cfg;
  cfg.nx = 2;
  cfg.run_minres = false;
  auto rows = sweep(cfg);
  std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("index,n,nx,mu,lambda,K,c_p,beta,tau,dofs,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
}

TEST_SUITE_END();
