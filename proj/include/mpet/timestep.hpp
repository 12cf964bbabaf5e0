#pragma once

#include <optional>
#include <vector>

#include "mpet/assembly.hpp"
#include "mpet/solver.hpp"
#include "mpet/state.hpp"

namespace mpet {

struct InitialData {
  VectorField u0;
  std::vector<VectorField> v0;
  VectorField u1;                 // udot at t = 0
  std::vector<VectorField> v1;    // vdot at t = 0
  std::vector<ScalarField> p0;

  static InitialData zero(int n) {
    InitialData d;
    d.v0.resize(n);
    d.v1.resize(n);
    d.p0.resize(n);
    return d;
  }
};

/// Interpolates the initial fields (null fields are zero) and projects the
/// pressures to zero mean per network.
State initial_state(const BlockSystem& sys, const InitialData& data);

/// Direct integrates the pre-symmetrized combined Crank-Nicolson system
/// (second order in time); Minres solves the symmetrized operator with the
/// block preconditioner, the form the stability theory is stated for.
enum class StepSolver { Direct, Minres };

struct StepOptions {
  StepSolver solver = StepSolver::Direct;
  double tol = 1e-10;  // minres only
  int max_iter = 2000;
};

/// Drives A y^{k+1} = G^{k+1}; the direct factorization is reused across steps.
class TimeStepper {
 public:
  TimeStepper(const BlockSystem& sys, LoadSpec loads, StepOptions options = {});

  State step(const State& state_k);

  const BlockSystem& system() const { return *sys_; }

 private:
  const BlockSystem* sys_;
  LoadSpec loads_;
  StepOptions options_;
  std::optional<DirectSolver> direct_;
};

/// One step with a throwaway solver (tests and small drivers).
State step(const BlockSystem& sys, const State& state_k, const LoadSpec& loads,
           StepOptions options = {});

/// Elementwise residual of the solved mass-balance row between two
/// consecutive states, one column per network. Because the divergence of
/// every velocity space lands in P0 exactly, each entry is the discrete
/// mass balance of one element.
Eigen::MatrixXd mass_residual(const State& state_k, const State& state_k1, const BlockSystem& sys);

/// Residual of the velocity-consistency rows (trapezoidal relation between
/// r and s) of the solved system, relative to the row scale.
double velocity_consistency_residual(const BlockSystem& sys, const State& state_k,
                                     const State& state_k1);

struct StepDiagnostics {
  int step = 0;
  double t = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double mass_residual_max = 0.0;
  double w_norm = 0.0;
};

struct RunSummary {
  State final_state;
  std::vector<StepDiagnostics> steps;
};

/// n_steps steps of length tau from the given initial data.
RunSummary run(const BlockSystem& sys, const LoadSpec& loads, const InitialData& initial,
               int n_steps, StepOptions options = {});

struct ConvergenceResult {
  std::vector<double> taus;
  std::vector<double> diffs;   // ||y_tau_j - y_tau_{j+1}||_W at the common final time
  std::vector<double> rates;   // log2(diff_j / diff_{j+1})
  bool machine_precision = false;
};

/// Temporal self-convergence: reruns the trajectory for each tau (all
/// dividing t_common) and measures successive differences in the W norm of
/// the finest system.
ConvergenceResult run_convergence(const Mesh& mesh, const MpetParameters& params, const DgConfig& dg,
                                  const LoadSpec& loads, const InitialData& initial,
                                  const std::vector<double>& tau_list, double t_common);

}  // namespace mpet
