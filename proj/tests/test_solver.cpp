#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "mpet/solver.hpp"

using namespace mpet;

namespace {

BlockSystem small_system(int n = 2, double beta = 1.0) {
  Mesh mesh = build_structured_mesh(2, 2);
  MpetParameters p = MpetParameters::defaults(n, beta);
  p.tau = 0.1;
  return assemble_operator(mesh, p);
}

Eigen::VectorXd random_compatible_rhs(const BlockSystem& sys, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd b(sys.layout.total);
  for (int i = 0; i < b.size(); ++i) b[i] = gauss(rng);
  for (int i = 0; i < sys.layout.n; ++i) {
    auto blk = b.segment(sys.layout.p(i), sys.layout.np);
    blk.array() -= blk.mean();
  }
  return b;
}

/// Dense oracle: Galerkin restriction to the deflated subspace via LU.
Eigen::VectorXd dense_deflated_solve(const BlockSystem& sys, const Eigen::VectorXd& b) {
  Eigen::MatrixXd Z = sys.deflation_basis();
  Eigen::MatrixXd Ad = Z.transpose() * Eigen::MatrixXd(sys.A) * Z;
  Eigen::VectorXd xr = Ad.fullPivLu().solve(Z.transpose() * b);
  return Z * xr;
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("perfectly preconditioned system converges immediately") {
  BlockSystem sys = small_system();
  sys.A = sys.W;  // test hook: identity-preconditioned SPD system
  Eigen::VectorXd b = random_compatible_rhs(sys, 1);
  auto [x, stats] = minres(sys, b, 1e-10, 50);
  CHECK(stats.converged);
  CHECK(stats.iterations <= 1);
  CHECK((sys.W * x - b).norm() / b.norm() < 1e-8);
}

TEST_CASE("zero rhs returns zero in zero iterations") {
  BlockSystem sys = small_system();
  auto [x, stats] = minres(sys, Eigen::VectorXd::Zero(sys.layout.total), 1e-10, 50);
  CHECK(stats.converged);
  CHECK(stats.iterations == 0);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("minres agrees with the dense oracle") {
  BlockSystem sys = small_system();
  Eigen::VectorXd b = random_compatible_rhs(sys, 2);
  auto [x, stats] = minres(sys, b, 1e-12, 2000);
  CHECK(stats.converged);
  Eigen::VectorXd xd = dense_deflated_solve(sys, b);
  CHECK((x - xd).norm() / xd.norm() < 1e-8);
}

TEST_CASE("minres rejects bad tolerances") {
  BlockSystem sys = small_system();
  CHECK_THROWS_AS(minres(sys, Eigen::VectorXd::Zero(sys.layout.total), 0.0, 10),
                  std::invalid_argument);
}

TEST_CASE("direct solver") {
  BlockSystem sys = small_system();
  Eigen::VectorXd b = random_compatible_rhs(sys, 3);

  SUBCASE("residual on a random compatible rhs") {
    Eigen::VectorXd x = direct_solve(sys, b);
    CHECK((sys.A * x - b).norm() / b.norm() < 1e-10);
  }
  SUBCASE("cross-oracle against minres") {
    Eigen::VectorXd x = direct_solve(sys, b);
    auto [xm, stats] = minres(sys, b, 1e-12, 2000);
    CHECK(stats.converged);
    CHECK((x - xm).norm() / x.norm() < 1e-9);
  }
  SUBCASE("zero rhs") {
    CHECK(direct_solve(sys, Eigen::VectorXd::Zero(sys.layout.total)).norm() == 0.0);
  }
  SUBCASE("solution pressures have zero mean") {
    Eigen::VectorXd x = direct_solve(sys, b);
    for (int i = 0; i < sys.layout.n; ++i)
      CHECK(std::abs(sys.cell_area.dot(x.segment(sys.layout.p(i), sys.layout.np))) < 1e-12);
  }
}

TEST_CASE("repeated solves are bit-identical") {
  BlockSystem sys = small_system();
  Eigen::VectorXd b = random_compatible_rhs(sys, 4);
  auto [x1, s1] = minres(sys, b, 1e-9, 2000);
  auto [x2, s2] = minres(sys, b, 1e-9, 2000);
  CHECK(s1.iterations == s2.iterations);
  CHECK(s1.relative_residual == s2.relative_residual);
  CHECK((x1 - x2).norm() == 0.0);
}

TEST_CASE("spectrum") {
  BlockSystem sys = small_system();

  SUBCASE("A = W gives a unit spectrum") {
    BlockSystem hook = sys;
    hook.A = hook.W;
    Spectrum sp = spectrum(hook);
    CHECK(std::abs(sp.min_abs - 1.0) < 1e-10);
    CHECK(std::abs(sp.max_abs - 1.0) < 1e-10);
    CHECK(std::abs(sp.kappa - 1.0) < 1e-10);
  }
  SUBCASE("A = -W flips the sign only") {
    BlockSystem hook = sys;
    hook.A = SpMat(-hook.W);
    Spectrum sp = spectrum(hook);
    CHECK(std::abs(sp.kappa - 1.0) < 1e-10);
    CHECK(sp.xi.maxCoeff() < 0.0);
  }
  SUBCASE("default parameters give a bounded indefinite pencil") {
    Spectrum sp = spectrum(sys);
    CHECK(sp.min_abs > 0.0);
    CHECK(sp.max_abs >= sp.min_abs);
    CHECK(std::isfinite(sp.kappa));
    CHECK(sp.xi.minCoeff() < 0.0);  // saddle point structure
    CHECK(sp.xi.maxCoeff() > 0.0);
  }
  SUBCASE("dimension guard") {
    CHECK_THROWS_AS(spectrum(sys, 10), std::invalid_argument);
  }
}

TEST_CASE("pencil stays nonsingular in the degenerate limits") {
  // c_p = 0, beta~ = 0: the undeflated operator annihilates constant
  // pressures; after deflation the pencil must be bounded away from zero.
  Mesh mesh = build_structured_mesh(2, 2);
  MpetParameters p = MpetParameters::defaults(2, 0.0);
  p.c_p.setZero();
  BlockSystem sys = assemble_operator(mesh, p);
  Spectrum sp = spectrum(sys);
  CHECK(sp.min_abs > 1e-8);

  Eigen::VectorXd b = random_compatible_rhs(sys, 5);
  Eigen::VectorXd x = direct_solve(sys, b);
  CHECK((sys.A * x - b).norm() / b.norm() < 1e-10);
}

TEST_CASE("iteration count is controlled by the preconditioned spectrum") {
  BlockSystem sys = small_system();
  const double tol = 1e-8;
  Spectrum sp = spectrum(sys);
  Eigen::VectorXd b = random_compatible_rhs(sys, 6);
  auto [x, stats] = minres(sys, b, tol, 2000);
  CHECK(stats.converged);
  CHECK(stats.iterations <= 4.0 * std::sqrt(sp.kappa) * std::log(1.0 / tol));
}

TEST_SUITE_END();
