#pragma once

#include <string>
#include <vector>

#include "mpet/assembly.hpp"
#include "mpet/model.hpp"

namespace mpet {

/// Cartesian robustness sweep. Every listed axis is applied uniformly
/// across the networks; remaining parameters come from
/// MpetParameters::defaults(n).
struct SweepConfig {
  std::vector<double> mu{1.0};
  std::vector<double> lambda{1.0};
  std::vector<double> K{1.0};
  std::vector<double> c_p{1.0};
  std::vector<double> beta{0.0};
  std::vector<double> tau{0.1};
  std::vector<int> n{1};
  std::vector<int> mesh{};  // nx values; empty means {nx}

  int nx = 4;
  double eta = 10.0;
  double tol = 1e-8;
  int max_iter = 2000;
  unsigned long long seed = 7;
  int jobs = 1;
  int dense_cap = 4000;
  bool run_spectrum = true;
  bool run_minres = true;
  bool identity_hook = false;  // test hook: replaces A by W before measuring

  std::size_t grid_size() const;
};

struct SweepRow {
  int index = 0;
  int n = 0, nx = 0, dofs = 0;
  double mu = 0, lambda = 0, K = 0, c_p = 0, beta = 0, tau = 0;
  double min_xi = 0, max_xi = 0, kappa = 0;
  int iterations = 0;
  double relres = 0;
  bool converged = false;
  bool ok = true;
  std::string error;
};

/// One row per grid point; per-point failures are recorded in the row and
/// the sweep continues. Deterministic for a fixed seed, independent of jobs.
std::vector<SweepRow> sweep(const SweepConfig& config);

/// Fixed, documented column order; doubles rendered with %.17g.
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct FemConstants {
  int nx = 0;
  double alpha_a = 0;  // coercivity of a_h w.r.t. the h-norm
  double c0 = 0;       // optimal constant in ||u||_DG^2 <= c0 ||u||_h^2
  double c1 = 0;       // optimal constant in ||u||_h^2 >= c1 ||u||_DG^2
  double c2 = 0;       // continuity of a_h w.r.t. the DG norm
  double c3 = 0;       // discrete Poincare constant
  double beta_s = 0;   // inf-sup of (div u, q) with the 1,h norm
  double beta_v = 0;   // inf-sup of (div v, q) with the H(div) norm
};

std::vector<FemConstants> measure_fem_constants(const std::vector<int>& mesh_sizes, double eta = 10.0);

std::string constants_csv(const std::vector<FemConstants>& rows);

/// Relative spread (max - min) / min of a strictly positive sample.
double relative_spread(const std::vector<double>& values);

}  // namespace mpet
