#pragma once

#include <memory>

#include <Eigen/Core>

#include "mpet/assembly.hpp"

namespace mpet {

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;  // preconditioned residual norm ratio
  double seconds = 0.0;
  bool converged = false;
  bool breakdown = false;
};

/// Exact application of the block-diagonal preconditioner (Cholesky solves
/// of B_uv and B_p) followed by the per-network zero-mean projection.
class BlockPreconditioner {
 public:
  explicit BlockPreconditioner(const BlockSystem& sys);
  ~BlockPreconditioner();
  BlockPreconditioner(BlockPreconditioner&&) noexcept;

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Preconditioned MINRES on the deflated (zero-mean pressure) subspace.
/// Returns the best iterate with stats; stats.converged is false when
/// max_iter is exceeded.
std::pair<Eigen::VectorXd, SolveStats> minres(const BlockSystem& sys, const Eigen::VectorXd& rhs,
                                              double tol = 1e-8, int max_iter = 2000);

/// Sparse direct factorization of the operator bordered with the
/// per-network mean constraints; solves the Galerkin restriction to the
/// zero-mean pressure subspace exactly. Reusable across right-hand sides.
class DirectSolver {
 public:
  explicit DirectSolver(const BlockSystem& sys);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd direct_solve(const BlockSystem& sys, const Eigen::VectorXd& rhs);

struct Spectrum {
  Eigen::VectorXd xi;  // ascending generalized eigenvalues of (A, W) after deflation
  double min_abs = 0.0;
  double max_abs = 0.0;
  double kappa = 0.0;
};

/// Dense symmetric-definite pencil A x = xi W x on the deflated subspace.
/// Throws when the system exceeds the dense cap.
Spectrum spectrum(const BlockSystem& sys, int dense_cap = 4000);

}  // namespace mpet
