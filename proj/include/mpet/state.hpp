#pragma once

#include <vector>

#include <Eigen/Core>

namespace mpet {

/// Coefficient vectors of the five-field unknown (u, v_1..n, udot, vdot_1..n,
/// p_1..n) at one time level, plus per-step diagnostics.
struct State {
  double t = 0.0;
  Eigen::VectorXd u;                 // BDM1
  std::vector<Eigen::VectorXd> v;    // n x BDM1
  Eigen::VectorXd ud;                // RT0
  std::vector<Eigen::VectorXd> vd;   // n x RT0
  std::vector<Eigen::VectorXd> p;    // n x P0, zero mean per network

  int minres_iterations = 0;
  double minres_residual = 0.0;
  double mass_residual_max = 0.0;
};

}  // namespace mpet
