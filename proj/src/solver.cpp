#include "mpet/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <chrono>
#include <stdexcept>

namespace mpet {

namespace {

/// Removes the plain-sum component of the pressure rows (range-side
/// compatibility; coincides with the weighted mean on uniform meshes).
void project_pressure_rows(const BlockSystem& sys, Eigen::VectorXd& r) {
  for (int i = 0; i < sys.layout.n; ++i) {
    auto block = r.segment(sys.layout.p(i), sys.layout.np);
    block.array() -= block.mean();
  }
}

}  // namespace

struct BlockPreconditioner::Impl {
  const BlockSystem* sys;
  Eigen::SimplicialLLT<SpMat> uv;
  Eigen::SimplicialLLT<SpMat> p;
};

BlockPreconditioner::BlockPreconditioner(const BlockSystem& sys) : impl_(new Impl) {
  impl_->sys = &sys;
  impl_->uv.compute(sys.Buv);
  if (impl_->uv.info() != Eigen::Success)
    throw std::runtime_error("BlockPreconditioner: B_uv factorization failed (not SPD?)");
  impl_->p.compute(sys.Bp);
  if (impl_->p.info() != Eigen::Success)
    throw std::runtime_error("BlockPreconditioner: B_p factorization failed (not SPD?)");
}

BlockPreconditioner::~BlockPreconditioner() = default;
BlockPreconditioner::BlockPreconditioner(BlockPreconditioner&&) noexcept = default;

Eigen::VectorXd BlockPreconditioner::apply(const Eigen::VectorXd& r) const {
  const BlockSystem& sys = *impl_->sys;
  const int uv_size = sys.layout.p(0);
  Eigen::VectorXd z(sys.layout.total);
  z.head(uv_size) = impl_->uv.solve(r.head(uv_size));
  z.tail(sys.layout.total - uv_size) = impl_->p.solve(r.tail(sys.layout.total - uv_size));
  sys.project_zero_mean(z);
  return z;
}

std::pair<Eigen::VectorXd, SolveStats> minres(const BlockSystem& sys, const Eigen::VectorXd& rhs,
                                              double tol, int max_iter) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("minres: tol must lie in (0,1)");
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  SolveStats stats;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.layout.total);

  Eigen::VectorXd b = rhs;
  project_pressure_rows(sys, b);
  if (b.norm() == 0.0) {
    stats.converged = true;
    stats.seconds = elapsed();
    return {x, stats};
  }

  BlockPreconditioner prec(sys);

  // Paige-Saunders recurrence with an SPD preconditioner; phibar tracks the
  // preconditioned residual norm.
  Eigen::VectorXd r1 = b;
  Eigen::VectorXd y = prec.apply(r1);
  double beta1 = r1.dot(y);
  if (beta1 < 0.0) {
    stats.breakdown = true;
    stats.seconds = elapsed();
    return {x, stats};
  }
  beta1 = std::sqrt(beta1);
  if (beta1 == 0.0) {
    stats.converged = true;
    stats.seconds = elapsed();
    return {x, stats};
  }

  Eigen::VectorXd r2 = r1;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd w1 = w, w2 = w;

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;

  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd v = y / beta;
    y = sys.A * v;
    project_pressure_rows(sys, y);
    if (it >= 2) y -= (beta / oldb) * r1;
    double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = prec.apply(r2);
    oldb = beta;
    double bb = r2.dot(y);
    if (bb < 0.0) {
      stats.breakdown = true;
      break;
    }
    beta = std::sqrt(bb);

    double oldeps = epsln;
    double delta = cs * dbar + sn * alfa;
    double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;

    double gamma = std::max(std::hypot(gbar, beta), 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    stats.iterations = it;
    stats.relative_residual = phibar / beta1;
    if (stats.relative_residual <= tol) {
      stats.converged = true;
      break;
    }
  }

  sys.project_zero_mean(x);
  stats.seconds = elapsed();
  return {x, stats};
}

struct DirectSolver::Impl {
  const BlockSystem* sys;
  Eigen::SparseLU<SpMat> lu;
  int total = 0;
};

DirectSolver::DirectSolver(const BlockSystem& sys) : impl_(new Impl) {
  impl_->sys = &sys;
  impl_->total = sys.layout.total;
  const int n = sys.layout.n;
  const SpMat& M = sys.A;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(M.nonZeros() + 2 * n * sys.layout.np);
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < sys.layout.np; ++t) {
      trips.emplace_back(sys.layout.p(i) + t, impl_->total + i, sys.cell_area[t]);
      trips.emplace_back(impl_->total + i, sys.layout.p(i) + t, sys.cell_area[t]);
    }
  }
  SpMat bordered(impl_->total + n, impl_->total + n);
  bordered.setFromTriplets(trips.begin(), trips.end());
  impl_->lu.compute(bordered);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error("DirectSolver: singular operator after deflation (parameter diagnostic)");
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd ext = Eigen::VectorXd::Zero(impl_->total + impl_->sys->layout.n);
  ext.head(impl_->total) = rhs;
  Eigen::VectorXd sol = impl_->lu.solve(ext);
  if (impl_->lu.info() != Eigen::Success) throw std::runtime_error("DirectSolver: solve failed");
  return sol.head(impl_->total);
}

Eigen::VectorXd direct_solve(const BlockSystem& sys, const Eigen::VectorXd& rhs) {
  return DirectSolver(sys).solve(rhs);
}

Spectrum spectrum(const BlockSystem& sys, int dense_cap) {
  if (sys.layout.total > dense_cap)
    throw std::invalid_argument("spectrum: system too large for the dense path");

  Eigen::MatrixXd Z = sys.deflation_basis();
  Eigen::MatrixXd Ad = Z.transpose() * (sys.A * Z);
  Eigen::MatrixXd Wd = Z.transpose() * (sys.W * Z);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Wd,
                                                               Eigen::Ax_lBx | Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");

  Spectrum sp;
  sp.xi = es.eigenvalues();
  sp.min_abs = sp.xi.cwiseAbs().minCoeff();
  sp.max_abs = sp.xi.cwiseAbs().maxCoeff();
  sp.kappa = (sp.min_abs > 0.0) ? sp.max_abs / sp.min_abs : std::numeric_limits<double>::infinity();
  return sp;
}

}  // namespace mpet
