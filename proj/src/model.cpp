#include "mpet/model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpet {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument("MpetParameters: " + what);
}

}  // namespace

void MpetParameters::validate() const {
  require(n >= 1, "n must be >= 1");
  require(mu > 0.0, "mu must be > 0");
  require(lambda >= 0.0, "lambda must be >= 0");
  require(rho_s >= 0.0, "rho_s must be >= 0");
  require(tau > 0.0, "tau must be > 0");
  auto sized = [&](const Eigen::VectorXd& v, const char* name) {
    require(v.size() == n, std::string(name) + " must have n entries");
  };
  sized(phi, "phi");
  sized(rho, "rho");
  sized(rho_m, "rho_m");
  sized(K, "K");
  sized(alpha_tilde, "alpha_tilde");
  sized(c_p, "c_p");
  require(beta_tilde.rows() == n && beta_tilde.cols() == n, "beta_tilde must be n x n");

  for (int i = 0; i < n; ++i) {
    std::ostringstream tag;
    tag << "network " << (i + 1) << ": ";
    require(phi[i] > 0.0 && phi[i] < 1.0, tag.str() + "phi_i must be in (0,1)");
    require(rho[i] >= 0.0, tag.str() + "rho_i must be >= 0");
    require(K[i] > 0.0, tag.str() + "K_i must be > 0");
    require(c_p[i] >= 0.0, tag.str() + "c_p_i must be >= 0");
    require(alpha_tilde[i] >= phi[i] - 1e-15 && alpha_tilde[i] <= 1.0 + 1e-15,
            tag.str() + "alpha~_i must satisfy phi_i <= alpha~_i <= 1");
    require(rho_m[i] >= rho[i] / phi[i] - 1e-12 * std::abs(rho_m[i]),
            tag.str() + "rho_m_i must be >= rho_i / phi_i");
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      require(beta_tilde(i, j) >= 0.0, tag.str() + "beta~_ij must be >= 0");
      require(beta_tilde(i, j) == beta_tilde(j, i), tag.str() + "beta~ must be symmetric");
    }
  }
  double phi_sum = phi.sum();
  require(phi_sum > 0.0 && phi_sum < 1.0, "sum of phi_i must lie in (0,1)");
}

MpetParameters MpetParameters::defaults(int n, double beta) {
  MpetParameters p;
  p.n = n;
  p.phi = Eigen::VectorXd::Constant(n, 0.5 / n);
  p.rho = Eigen::VectorXd::Constant(n, 1.0);
  p.rho_m = 1.5 * p.rho.cwiseQuotient(p.phi);
  p.K = Eigen::VectorXd::Constant(n, 1.0);
  p.alpha_tilde = Eigen::VectorXd::Constant(n, 1.0);
  p.c_p = Eigen::VectorXd::Constant(n, 1.0);
  p.beta_tilde = Eigen::MatrixXd::Constant(n, n, beta);
  p.beta_tilde.diagonal().setZero();
  return p;
}

DerivedCoefficients derive_coefficients(const MpetParameters& params) {
  params.validate();
  const int n = params.n;
  DerivedCoefficients d;
  d.alpha = params.alpha_tilde - params.phi;
  d.gamma_i.resize(n);
  d.gamma_v.resize(n);
  for (int i = 0; i < n; ++i) {
    d.gamma_i[i] = -((params.rho[i] - params.phi[i] * params.rho_m[i]) -
                     0.5 * params.tau * params.phi[i] / params.K[i]);
    d.gamma_v[i] = (params.rho[i] + d.gamma_i[i]) / params.phi[i] + 1.0;
  }
  d.gamma_u = (1.0 - params.phi_total()) * params.rho_s + 1.0 + params.phi.dot(d.gamma_i);

  d.beta = Eigen::MatrixXd::Zero(n, n);
  const double t3 = std::pow(params.tau, 3) / 8.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d.beta(i, j) = t3 * params.beta_tilde(i, j);
      row += t3 * params.beta_tilde(i, j);
    }
    d.beta(i, i) = row + 0.25 * params.tau * params.tau * params.c_p[i];
  }

  d.gamma = std::max({0.5 * params.tau * params.tau * params.mu,
                      0.25 * params.tau * params.tau * params.lambda, d.gamma_u});
  return d;
}

NormWeights build_norm_weights(const MpetParameters& params, const DerivedCoefficients& derived) {
  const int n = params.n;
  const double tau = params.tau;
  NormWeights w;

  // Lambda1 = -(tau/2 L33 + D33): transfer graph Laplacian scaled by tau/2
  // plus the storage diagonal.
  w.lambda1 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double offsum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      w.lambda1(i, j) = -0.5 * tau * params.beta_tilde(i, j);
      offsum += params.beta_tilde(i, j);
    }
    w.lambda1(i, i) = 0.5 * tau * offsum + params.c_p[i];
  }

  w.lambda2 = (0.25 * tau * tau) * derived.gamma_v.cwiseInverse().asDiagonal();
  w.lambda3 = (0.25 * tau * tau / derived.gamma) * derived.alpha * derived.alpha.transpose();
  w.lambda = w.lambda1 + w.lambda2 + w.lambda3;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.lambda);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  w.lambda_condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(w.lambda_condition < 1e15))
    throw std::runtime_error("build_norm_weights: Lambda numerically singular (degenerate parameters)");
  w.lambda_inv = w.lambda.inverse();

  const int m = 2 * n + 2;
  w.lambda_uv = Eigen::MatrixXd::Zero(m, m);
  w.lambda_uv(0, 0) = derived.gamma_u;
  for (int i = 0; i < n; ++i) {
    w.lambda_uv(0, 1 + i) = w.lambda_uv(1 + i, 0) = -derived.gamma_i[i];
    w.lambda_uv(1 + i, 1 + i) = derived.gamma_v[i];
  }
  const int ud = 1 + n;  // udot slot, then vdot slots
  w.lambda_uv(0, ud) = w.lambda_uv(ud, 0) = -0.5 * tau;
  w.lambda_uv(ud, ud) = 0.25 * tau * tau;
  for (int i = 0; i < n; ++i) {
    int vd = ud + 1 + i;
    w.lambda_uv(1 + i, vd) = w.lambda_uv(vd, 1 + i) = -0.5 * tau;
    w.lambda_uv(vd, vd) = 0.25 * tau * tau;
  }
  return w;
}

double lemma3_det(double a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(b.size());
  if (n < 1) throw std::invalid_argument("lemma3_det: n must be >= 1");
  double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(a, n - 1) * b[n - 1];
}

double lemma4_det(double c, double a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(b.size());
  if (n < 1) throw std::invalid_argument("lemma4_det: n must be >= 1");
  return std::pow(a, n - 1) * (a * c - b.squaredNorm());
}

Eigen::MatrixXd lemma3_matrix(double a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(b.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A.row(0) = -b.transpose();
  for (int i = 1; i < n; ++i) A(i, i - 1) = a;
  return A;
}

Eigen::MatrixXd lemma4_matrix(double c, double a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(b.size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + 1, n + 1);
  B(0, 0) = c;
  B.block(0, 1, 1, n) = -b.transpose();
  B.block(1, 0, n, 1) = -b;
  B.block(1, 1, n, n) = a * Eigen::MatrixXd::Identity(n, n);
  return B;
}

GMatrixCheck g_matrix_checks(const MpetParameters& params, const DerivedCoefficients& derived,
                             double tol) {
  const int n = params.n;
  GMatrixCheck chk;
  chk.c = derived.gamma_u / derived.gamma;

  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i)
    b[i] = derived.gamma_i[i] / std::sqrt(derived.gamma_v[i] * derived.gamma);
  chk.sum_b_sq = b.squaredNorm();

  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(n + 1, n + 1);
  G(0, 0) = chk.c;
  G.block(0, 1, 1, n) = -b.transpose();
  G.block(1, 0, n, 1) = -b;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  chk.lambda_max = es.eigenvalues().maxCoeff();
  chk.lambda_max_closed =
      0.5 * ((1.0 + chk.c) + std::sqrt((1.0 - chk.c) * (1.0 - chk.c) + 4.0 * chk.sum_b_sq));

  chk.bounds_hold = chk.sum_b_sq <= 1.0 + tol && chk.lambda_max <= 2.0 + tol &&
                    std::abs(chk.lambda_max - chk.lambda_max_closed) <=
                        tol * std::max(1.0, chk.lambda_max);
  return chk;
}

MpetParameters sample_admissible(std::mt19937_64& rng, int max_n, double log10_min, double log10_max) {
  std::uniform_int_distribution<int> pick_n(1, max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto logu = [&](double lo, double hi) { return std::pow(10.0, lo + (hi - lo) * unit(rng)); };

  MpetParameters p;
  p.n = pick_n(rng);
  p.mu = logu(log10_min, log10_max);
  p.lambda = logu(log10_min, log10_max);
  p.rho_s = unit(rng) < 0.1 ? 0.0 : logu(log10_min, log10_max);
  p.tau = logu(log10_min / 2.0, log10_max / 2.0);

  const int n = p.n;
  p.phi.resize(n);
  double total = 0.05 + 0.9 * unit(rng);  // sum of porosities, in (0,1)
  Eigen::VectorXd parts(n);
  for (int i = 0; i < n; ++i) parts[i] = 0.05 + unit(rng);
  p.phi = total * parts / parts.sum();

  p.rho.resize(n);
  p.rho_m.resize(n);
  p.K.resize(n);
  p.alpha_tilde.resize(n);
  p.c_p.resize(n);
  for (int i = 0; i < n; ++i) {
    p.rho[i] = unit(rng) < 0.1 ? 0.0 : logu(log10_min, log10_max);
    p.rho_m[i] = (p.rho[i] / p.phi[i]) * (1.0 + (unit(rng) < 0.2 ? 0.0 : logu(-4.0, 4.0)));
    if (p.rho[i] == 0.0) p.rho_m[i] = unit(rng) < 0.5 ? 0.0 : logu(log10_min, log10_max);
    p.K[i] = logu(log10_min, log10_max);
    p.alpha_tilde[i] = p.phi[i] + (1.0 - p.phi[i]) * unit(rng);
    p.c_p[i] = unit(rng) < 0.25 ? 0.0 : logu(log10_min, log10_max);
  }
  p.beta_tilde = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      p.beta_tilde(i, j) = p.beta_tilde(j, i) = unit(rng) < 0.25 ? 0.0 : logu(log10_min, log10_max);
  return p;
}

LemmaCheckSummary run_lemma_checks(int draws, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_n(1, 8);
  // magnitudes bounded away from zero so the relative comparison against
  // the LU determinant stays meaningful
  std::uniform_real_distribution<double> mag(0.1, 3.0);
  std::bernoulli_distribution flip;
  auto coef = [&] { return (flip(rng) ? 1.0 : -1.0) * mag(rng); };

  LemmaCheckSummary sum;
  sum.draws = draws;
  auto record_fail = [&](const std::string& what) {
    if (sum.first_failure.empty()) sum.first_failure = what;
  };

  for (int d = 0; d < draws; ++d) {
    bool ok = true;

    const int n = pick_n(rng);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = coef();
    double a = coef(), c = coef();

    double det3 = lemma3_det(a, b);
    double det3_lu = lemma3_matrix(a, b).fullPivLu().determinant();
    double scale3 = std::max({1e-30, std::abs(det3), std::abs(det3_lu)});
    double err3 = std::abs(det3 - det3_lu) / scale3;

    double det4 = lemma4_det(c, a, b);
    double det4_lu = lemma4_matrix(c, a, b).fullPivLu().determinant();
    double scale4 = std::max({1e-30, std::abs(det4), std::abs(det4_lu)});
    double err4 = std::abs(det4 - det4_lu) / scale4;

    sum.worst_rel_error = std::max({sum.worst_rel_error, err3, err4});
    if (err3 > 1e-10) { ok = false; record_fail("lemma3 determinant mismatch"); }
    if (err4 > 1e-10) { ok = false; record_fail("lemma4 determinant mismatch"); }

    MpetParameters params = sample_admissible(rng);
    auto derived = derive_coefficients(params);
    auto g = g_matrix_checks(params, derived);
    if (!g.bounds_hold) {
      ok = false;
      std::ostringstream os;
      os << "G-matrix bound violated: sum b^2 = " << g.sum_b_sq << ", lambda_max = " << g.lambda_max
         << ", c = " << g.c << " (n = " << params.n << ", tau = " << params.tau << ")";
      record_fail(os.str());
    }

    if (ok) ++sum.passed;
  }
  return sum;
}

}  // namespace mpet
