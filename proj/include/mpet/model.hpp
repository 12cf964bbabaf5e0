#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mpet {

/// Physical and scheme parameters of the n-network poroelastic model.
/// All quantities are nondimensional.
struct MpetParameters {
  int n = 1;               // network count
  double mu = 1.0;         // shear modulus, > 0
  double lambda = 1.0;     // first Lame parameter, >= 0
  double rho_s = 1.0;      // solid density, >= 0
  double tau = 0.1;        // time step, > 0
  double t_final = 1.0;

  Eigen::VectorXd phi;          // porosities, each in (0,1), sum in (0,1)
  Eigen::VectorXd rho;          // fluid densities, >= 0
  Eigen::VectorXd rho_m;        // effective densities, >= rho_i / phi_i
  Eigen::VectorXd K;            // hydraulic conductivities, > 0
  Eigen::VectorXd alpha_tilde;  // Biot-Willis, phi_i <= alpha~_i <= 1
  Eigen::VectorXd c_p;          // storage coefficients, >= 0
  Eigen::MatrixXd beta_tilde;   // transfer, symmetric, >= 0 off-diagonal (diagonal ignored)

  double phi_total() const { return phi.sum(); }

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;

  /// Uniform defaults: n networks, phi_i = 0.5/n, alpha~_i = 1,
  /// rho_m at 1.5x its admissible minimum; all couplings of strength beta.
  static MpetParameters defaults(int n, double beta = 0.0);
};

/// Scheme coefficients of the combined Crank-Nicolson operator.
struct DerivedCoefficients {
  Eigen::VectorXd alpha;    // alpha_i = alpha~_i - phi_i
  Eigen::VectorXd gamma_i;  // phi_i rho_m_i - rho_i + tau phi_i / (2 K_i)
  double gamma_u = 0.0;
  Eigen::VectorXd gamma_v;  // (rho_i + gamma_i)/phi_i + 1
  Eigen::MatrixXd beta;     // tau^3/8 beta~_ij off-diagonal, row-sum + tau^2/4 c_p_i on it
  double gamma = 0.0;       // max(tau^2 mu / 2, tau^2 lambda / 4, gamma_u)
};

DerivedCoefficients derive_coefficients(const MpetParameters& params);

/// The Lambda family defining the parameter-dependent stability norms.
struct NormWeights {
  Eigen::MatrixXd lambda1;     // tau/2 transfer Laplacian + storage (SPSD)
  Eigen::MatrixXd lambda2;     // tau^2/4 diag(1/gamma_v_i) (SPD)
  Eigen::MatrixXd lambda3;     // tau^2/(4 gamma) alpha alpha^T (rank <= 1)
  Eigen::MatrixXd lambda;      // lambda1 + lambda2 + lambda3 (SPD)
  Eigen::MatrixXd lambda_inv;
  double lambda_condition = 0.0;

  /// Scalar coefficient matrix of the (u, v, udot, vdot) mass couplings,
  /// one row/column per field: [gamma_u, -gamma_i; -gamma_i, diag(gamma_v)]
  /// with -tau/2 couplings to the velocities and tau^2/4 on their diagonal.
  Eigen::MatrixXd lambda_uv;   // (2n+2) x (2n+2)
};

/// Throws std::runtime_error if Lambda is numerically singular
/// (condition > 1e15); never regularizes.
NormWeights build_norm_weights(const MpetParameters& params, const DerivedCoefficients& derived);

/// det of the n x n matrix with first row -b^T and a on the subdiagonal
/// of the remaining rows: (-1)^n a^(n-1) b_n.
double lemma3_det(double a, const Eigen::VectorXd& b);

/// det of the (n+1) x (n+1) symmetric arrowhead [[c, -b^T], [-b, a I]]:
/// a^(n-1) (a c - sum b_i^2).
double lemma4_det(double c, double a, const Eigen::VectorXd& b);

/// Explicitly assembled matrices matching the lemma closed forms (oracle inputs).
Eigen::MatrixXd lemma3_matrix(double a, const Eigen::VectorXd& b);
Eigen::MatrixXd lemma4_matrix(double c, double a, const Eigen::VectorXd& b);

struct GMatrixCheck {
  double sum_b_sq = 0.0;
  double lambda_max = 0.0;        // dense eigensolver
  double lambda_max_closed = 0.0; // ((1+c) + sqrt((1-c)^2 + 4 sum b^2))/2
  double c = 0.0;                 // gamma_u / gamma
  bool bounds_hold = false;       // sum b^2 <= 1 + tol and lambda_max <= 2 + tol
};

/// Builds G = [[c, -b^T], [-b, I]] with b_i = gamma_i / sqrt(gamma_v_i gamma)
/// and checks the spectral bounds underpinning the inf-sup proof.
GMatrixCheck g_matrix_checks(const MpetParameters& params, const DerivedCoefficients& derived,
                             double tol = 1e-12);

/// Random admissible parameter draw with log-uniform magnitudes over
/// [10^log10_min, 10^log10_max]; n sampled in [1, max_n].
MpetParameters sample_admissible(std::mt19937_64& rng, int max_n = 4, double log10_min = -8.0,
                                 double log10_max = 8.0);

struct LemmaCheckSummary {
  int draws = 0;
  int passed = 0;
  double worst_rel_error = 0.0;  // lemma dets vs dense LU
  std::string first_failure;
};

/// Randomized property run: lemma determinants against dense LU and the
/// G-matrix bounds over admissible draws.
LemmaCheckSummary run_lemma_checks(int draws, unsigned long long seed);

/// Measured discretization/stability constants collected by the verify module.
struct StabilityReport {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double alpha_a = 0.0;
  double beta_s_h = 0.0, beta_v_h = 0.0;
  double kappa = 0.0, min_abs_xi = 0.0, max_abs_xi = 0.0;
  int minres_iterations = 0;
};

}  // namespace mpet
