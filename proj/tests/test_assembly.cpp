#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "mpet/assembly.hpp"

using namespace mpet;

namespace {

Eigen::MatrixXd dense(const SpMat& M) { return Eigen::MatrixXd(M); }

Eigen::MatrixXd block(const SpMat& M, int r0, int nr, int c0, int nc) {
  return dense(M).block(r0, c0, nr, nc);
}

MpetParameters two_network_params() {
  MpetParameters p = MpetParameters::defaults(2, 1.0);
  p.tau = 0.1;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("assembly");

TEST_CASE("operator is symmetric") {
  Mesh mesh = build_structured_mesh(2, 2);
  BlockSystem sys = assemble_operator(mesh, two_network_params());
  Eigen::MatrixXd A = dense(sys.A);
  double scale = A.cwiseAbs().maxCoeff();
  CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("decoupled single network has an empty u-v block") {
  // rho = phi rho_m kills the mass coupling, huge K the drag coupling,
  // alpha~ = phi the pressure coupling.
  MpetParameters p = MpetParameters::defaults(1);
  p.phi << 0.5;
  p.rho_m << 2.0;
  p.rho << 1.0;
  p.K << 1e12;
  p.alpha_tilde << 0.5;
  p.c_p << 0.0;
  p.beta_tilde.setZero();
  p.tau = 0.2;

  auto d = derive_coefficients(p);
  CHECK(d.gamma_i[0] < 1e-12);

  Mesh mesh = build_structured_mesh(2, 2);
  BlockSystem sys = assemble_operator(mesh, p);
  const auto& L = sys.layout;
  CHECK(block(sys.A, L.u(), L.nb, L.v(0), L.nb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero blocks of the five-field operator") {
  Mesh mesh = build_structured_mesh(2, 2);
  BlockSystem sys = assemble_operator(mesh, two_network_params());
  const auto& L = sys.layout;

  CHECK(block(sys.A, L.ud(), L.nr, L.vd(0), 2 * L.nr).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(block(sys.A, L.ud(), L.nr, L.p(i), L.np).cwiseAbs().maxCoeff() == 0.0);
    for (int j = 0; j < 2; ++j)
      CHECK(block(sys.A, L.vd(i), L.nr, L.p(j), L.np).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("pressure-pressure block") {
  Mesh mesh = build_structured_mesh(2, 2);
  MpetParameters params = two_network_params();
  BlockSystem sys = assemble_operator(mesh, params);
  const auto& L = sys.layout;
  const double t2 = 0.25 * params.tau * params.tau;

  SUBCASE("equals -tau^2/4 Lambda1 (x) P0 mass") {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Eigen::MatrixXd got = block(sys.A, L.p(i), L.np, L.p(j), L.np);
        Eigen::MatrixXd expect =
            -t2 * sys.weights.lambda1(i, j) * Eigen::MatrixXd(sys.cell_area.asDiagonal());
        CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-15);
      }
  }
  SUBCASE("negative semidefinite") {
    int psz = 2 * L.np;
    Eigen::MatrixXd P = dense(sys.A).bottomRightCorner(psz, psz);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    CHECK(es.eigenvalues().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("rhs assembly") {
  Mesh mesh = build_structured_mesh(2, 2);
  MpetParameters params = two_network_params();
  BlockSystem sys = assemble_operator(mesh, params);
  const auto& L = sys.layout;
  State zero = sys.unpack(Eigen::VectorXd::Zero(L.total), 0.0);

  SUBCASE("zero state, zero loads") {
    Eigen::VectorXd rhs = assemble_rhs(sys, zero, LoadSpec::zero(2), 0.0);
    CHECK(rhs.norm() == 0.0);
  }

  SUBCASE("constant body force fills only the first momentum row") {
    LoadSpec loads = LoadSpec::zero(2);
    loads.f = [](const Eigen::Vector2d&, double) { return Eigen::Vector2d(1.0, -2.0); };
    Eigen::VectorXd rhs = assemble_rhs(sys, zero, loads, 0.0);

    Eigen::VectorXd moments = assemble_load_moments(sys.mesh, sys.bdm1, [](const Eigen::Vector2d&) {
      return Eigen::Vector2d(1.0, -2.0);
    });
    double t2 = 0.25 * params.tau * params.tau;
    CHECK((rhs.segment(L.u(), L.nb) - 2.0 * t2 * moments).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(rhs.segment(L.v(0), L.total - L.nb).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("pure-pressure state with beta~ = 0 reproduces the storage row") {
    MpetParameters p = two_network_params();
    p.beta_tilde.setZero();
    p.c_p.setConstant(1.0);
    BlockSystem s2 = assemble_operator(mesh, p);
    State st = s2.unpack(Eigen::VectorXd::Zero(s2.layout.total), 0.0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < 2; ++i)
      for (int t = 0; t < s2.layout.np; ++t) st.p[i][t] = gauss(rng);

    Eigen::VectorXd rhs = assemble_rhs(s2, st, LoadSpec::zero(2), 0.0);
    double t2 = 0.25 * p.tau * p.tau;
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd expect = -t2 * p.c_p[i] * s2.cell_area.cwiseProduct(st.p[i]);
      CHECK((rhs.segment(s2.layout.p(i), s2.layout.np) - expect).cwiseAbs().maxCoeff() < 1e-15);
    }
    // the velocity rows see nothing from a pure-pressure state
    CHECK(rhs.segment(s2.layout.ud(), s2.layout.nr * 3).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("time range is enforced") {
    CHECK_THROWS_AS(assemble_rhs(sys, zero, LoadSpec::zero(2), sys.params.t_final),
                    std::out_of_range);
  }
}

TEST_CASE("preconditioner blocks") {
  Mesh mesh = build_structured_mesh(2, 2);

  SUBCASE("fully decoupled single network gives a diagonal B_p") {
    MpetParameters p = MpetParameters::defaults(1);
    p.alpha_tilde = p.phi;  // alpha = 0
    p.beta_tilde.setZero();
    p.c_p.setZero();
    BlockSystem sys = assemble_operator(mesh, p);
    // Lambda reduces to the scalar Lambda2 = tau^2/(4 gamma_v)
    double lam = 0.25 * p.tau * p.tau / sys.derived.gamma_v[0];
    Eigen::MatrixXd Bp = dense(sys.Bp);
    Eigen::MatrixXd expect =
        0.25 * p.tau * p.tau * lam * Eigen::MatrixXd(sys.cell_area.asDiagonal());
    CHECK((Bp - expect).cwiseAbs().maxCoeff() < 1e-16);
  }

  SUBCASE("standalone block accessor matches the assembled system") {
    BlockSystem sys = assemble_operator(mesh, two_network_params());
    auto [buv, bp] = assemble_preconditioner(mesh, two_network_params());
    CHECK((dense(buv) - dense(sys.Buv)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dense(bp) - dense(sys.Bp)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("SPD on the constrained space") {
    BlockSystem sys = assemble_operator(mesh, two_network_params());
    for (const SpMat* M : {&sys.Buv, &sys.Bp, &sys.W}) {
      Eigen::MatrixXd Md = dense(*M);
      CHECK((Md - Md.transpose()).cwiseAbs().maxCoeff() < 1e-12 * Md.cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Md);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }

  SUBCASE("W equals the norm computed term by term") {
    MpetParameters params = two_network_params();
    BlockSystem sys = assemble_operator(mesh, params);
    const auto& L = sys.layout;
    const double t2 = 0.25 * params.tau * params.tau;
    const int n = L.n;

    SpMat Ah = assemble_dg_elasticity(mesh, sys.bdm1, sys.dg);
    SpMat DD = assemble_div_div(mesh, sys.bdm1);
    SpMat Mbb = assemble_mass(mesh, sys.bdm1, sys.bdm1);
    SpMat Mrr = assemble_mass(mesh, sys.vel, sys.vel);
    SpMat Mbr = assemble_mass(mesh, sys.bdm1, sys.vel);
    SpMat D = assemble_div(mesh, sys.bdm1, sys.p0);
    Eigen::VectorXd inv_area = sys.cell_area.cwiseInverse();

    std::mt19937_64 rng(12);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::VectorXd x(L.total);
      for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);

      Eigen::VectorXd u = x.segment(L.u(), L.nb), ud = x.segment(L.ud(), L.nr);
      std::vector<Eigen::VectorXd> v(n), vd(n), pr(n);
      for (int i = 0; i < n; ++i) {
        v[i] = x.segment(L.v(i), L.nb);
        vd[i] = x.segment(L.vd(i), L.nr);
        pr[i] = x.segment(L.p(i), L.np);
      }

      double term_elast = t2 * 2.0 * params.mu * u.dot(Ah * u);
      double term_div = t2 * params.lambda * u.dot(DD * u);

      // tau^2/4 || Lambda^{-1/2} (Div v + alpha Div u) ||^2
      std::vector<Eigen::VectorXd> c(n);
      for (int i = 0; i < n; ++i)
        c[i] = sys.derived.alpha[i] * inv_area.cwiseProduct(D * u) + inv_area.cwiseProduct(D * v[i]);
      double term_coupling = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          term_coupling +=
              t2 * sys.weights.lambda_inv(i, j) * c[i].dot(sys.cell_area.cwiseProduct(c[j]));

      const auto& luv = sys.weights.lambda_uv;
      double term_uv = luv(0, 0) * u.dot(Mbb * u);
      for (int i = 0; i < n; ++i) {
        term_uv += 2.0 * luv(0, 1 + i) * u.dot(Mbb * v[i]);
        term_uv += luv(1 + i, 1 + i) * v[i].dot(Mbb * v[i]);
        term_uv += 2.0 * luv(1 + i, n + 2 + i) * v[i].dot(Mbr * vd[i]);
        term_uv += luv(n + 2 + i, n + 2 + i) * vd[i].dot(Mrr * vd[i]);
      }
      term_uv += 2.0 * luv(0, n + 1) * u.dot(Mbr * ud);
      term_uv += luv(n + 1, n + 1) * ud.dot(Mrr * ud);

      double term_p = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          term_p += t2 * sys.weights.lambda(i, j) * pr[i].dot(sys.cell_area.cwiseProduct(pr[j]));

      double via_terms = term_elast + term_div + term_coupling + term_uv + term_p;
      double via_w = x.dot(sys.W * x);
      CHECK(std::abs(via_terms - via_w) <= 1e-12 * std::max(std::abs(via_terms), std::abs(via_w)));
    }
  }
}

TEST_CASE("zero mean projection and deflation basis") {
  Mesh mesh = build_structured_mesh(2, 2);
  BlockSystem sys = assemble_operator(mesh, two_network_params());
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(sys.layout.total);
  for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);

  Eigen::VectorXd y = x;
  sys.project_zero_mean(y);
  for (int i = 0; i < sys.layout.n; ++i) {
    double mean = sys.cell_area.dot(y.segment(sys.layout.p(i), sys.layout.np));
    CHECK(std::abs(mean) < 1e-13);
  }
  CHECK((y.head(sys.layout.p(0)) - x.head(sys.layout.p(0))).norm() == 0.0);

  Eigen::MatrixXd Z = sys.deflation_basis();
  CHECK(Z.cols() == sys.layout.total - sys.layout.n);
  CHECK((Z.transpose() * Z - Eigen::MatrixXd::Identity(Z.cols(), Z.cols())).cwiseAbs().maxCoeff() <
        1e-12);
  for (int i = 0; i < sys.layout.n; ++i) {
    Eigen::VectorXd areas_in_block = Eigen::VectorXd::Zero(sys.layout.total);
    areas_in_block.segment(sys.layout.p(i), sys.layout.np) = sys.cell_area;
    CHECK((Z.transpose() * areas_in_block).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_SUITE_END();
