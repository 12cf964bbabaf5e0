#include "mpet/assembly.hpp"

#include <stdexcept>

namespace mpet {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& trips, const SpMat& M, int row0, int col0, double scale) {
  if (scale == 0.0) return;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      trips.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()),
                         scale * it.value());
}

void add_block_transposed(Triplets& trips, const SpMat& M, int row0, int col0, double scale) {
  if (scale == 0.0) return;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      trips.emplace_back(row0 + static_cast<int>(it.col()), col0 + static_cast<int>(it.row()),
                         scale * it.value());
}

void add_diag(Triplets& trips, const Eigen::VectorXd& d, int row0, int col0, double scale) {
  if (scale == 0.0) return;
  for (int i = 0; i < d.size(); ++i) trips.emplace_back(row0 + i, col0 + i, scale * d[i]);
}

}  // namespace

void BlockSystem::project_zero_mean(Eigen::VectorXd& x) const {
  const double total_area = cell_area.sum();
  for (int i = 0; i < layout.n; ++i) {
    auto block = x.segment(layout.p(i), layout.np);
    block.array() -= cell_area.dot(block) / total_area;
  }
}

Eigen::VectorXd BlockSystem::pack(const State& s) const {
  Eigen::VectorXd x(layout.total);
  x.segment(layout.u(), layout.nb) = s.u;
  for (int i = 0; i < layout.n; ++i) x.segment(layout.v(i), layout.nb) = s.v[i];
  x.segment(layout.ud(), layout.nr) = s.ud;
  for (int i = 0; i < layout.n; ++i) x.segment(layout.vd(i), layout.nr) = s.vd[i];
  for (int i = 0; i < layout.n; ++i) x.segment(layout.p(i), layout.np) = s.p[i];
  return x;
}

State BlockSystem::unpack(const Eigen::VectorXd& x, double t) const {
  State s;
  s.t = t;
  s.u = x.segment(layout.u(), layout.nb);
  s.ud = x.segment(layout.ud(), layout.nr);
  s.v.resize(layout.n);
  s.vd.resize(layout.n);
  s.p.resize(layout.n);
  for (int i = 0; i < layout.n; ++i) {
    s.v[i] = x.segment(layout.v(i), layout.nb);
    s.vd[i] = x.segment(layout.vd(i), layout.nr);
    s.p[i] = x.segment(layout.p(i), layout.np);
  }
  return s;
}

Eigen::MatrixXd BlockSystem::deflation_basis() const {
  const int uv_size = layout.p(0);
  const int m = layout.np;
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(layout.total, layout.total - layout.n);
  Z.topLeftCorner(uv_size, uv_size).setIdentity();

  // Householder reflector sending e_1 to the normalized area vector; its
  // trailing columns span the zero-weighted-mean subspace orthonormally.
  Eigen::VectorXd a = cell_area.normalized();
  Eigen::VectorXd v = a;
  v[0] += (a[0] >= 0.0 ? 1.0 : -1.0);
  v.normalize();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m) - 2.0 * v * v.transpose();
  Eigen::MatrixXd base = H.rightCols(m - 1);

  for (int i = 0; i < layout.n; ++i)
    Z.block(layout.p(i), uv_size + i * (m - 1), m, m - 1) = base;
  return Z;
}

BlockSystem assemble_operator(const Mesh& mesh, const MpetParameters& params, const DgConfig& dg) {
  params.validate();
  if (dg.eta <= 0.0) throw std::invalid_argument("assemble_operator: eta must be > 0");

  BlockSystem sys;
  sys.mesh = mesh;
  sys.params = params;
  sys.derived = derive_coefficients(params);
  sys.weights = build_norm_weights(params, sys.derived);
  sys.dg = dg;

  sys.bdm1 = build_dofmap(mesh, SpaceKind::BDM1, /*constrain_boundary=*/true);
  sys.vel = build_dofmap(mesh, SpaceKind::BDM1, /*constrain_boundary=*/true);
  sys.p0 = build_dofmap(mesh, SpaceKind::P0, /*constrain_boundary=*/false);

  const int n = params.n;
  sys.layout.n = n;
  sys.layout.nb = sys.bdm1.n_global;
  sys.layout.nr = sys.vel.n_global;
  sys.layout.np = sys.p0.n_global;
  sys.layout.total = sys.layout.nb * (1 + n) + sys.layout.nr * (1 + n) + sys.layout.np * n;

  sys.cell_area = Eigen::Map<const Eigen::VectorXd>(mesh.tri_area.data(), mesh.n_triangles());

  const double tau = params.tau;
  const double t2 = 0.25 * tau * tau;
  const DerivedCoefficients& dc = sys.derived;
  const NormWeights& nw = sys.weights;
  const BlockLayout& L = sys.layout;

  SpMat Ah = assemble_dg_elasticity(mesh, sys.bdm1, dg);
  SpMat DD = assemble_div_div(mesh, sys.bdm1);
  SpMat Mbb = assemble_mass(mesh, sys.bdm1, sys.bdm1);
  SpMat Mrr = assemble_mass(mesh, sys.vel, sys.vel);
  SpMat Mbr = assemble_mass(mesh, sys.bdm1, sys.vel);
  SpMat D = assemble_div(mesh, sys.bdm1, sys.p0);

  // Mass coefficients of the original operator blocks.
  const double m_u = (1.0 - params.phi_total()) * params.rho_s -
                     params.phi.dot(params.rho - params.phi.cwiseProduct(params.rho_m));
  Eigen::VectorXd m_uv = params.rho - params.phi.cwiseProduct(params.rho_m);

  // Time-step operator A (self-adjoint).
  {
    Triplets trips;
    add_block(trips, Ah, L.u(), L.u(), 2.0 * params.mu * t2);
    add_block(trips, DD, L.u(), L.u(), params.lambda * t2);
    add_block(trips, Mbb, L.u(), L.u(), dc.gamma_u);
    for (int i = 0; i < n; ++i) {
      add_block(trips, Mbb, L.u(), L.v(i), -dc.gamma_i[i]);
      add_block(trips, Mbb, L.v(i), L.u(), -dc.gamma_i[i]);
      add_block(trips, Mbb, L.v(i), L.v(i), dc.gamma_v[i]);
    }
    add_block(trips, Mbr, L.u(), L.ud(), -0.5 * tau);
    add_block_transposed(trips, Mbr, L.ud(), L.u(), -0.5 * tau);
    add_block(trips, Mrr, L.ud(), L.ud(), t2);
    for (int i = 0; i < n; ++i) {
      add_block(trips, Mbr, L.v(i), L.vd(i), -0.5 * tau);
      add_block_transposed(trips, Mbr, L.vd(i), L.v(i), -0.5 * tau);
      add_block(trips, Mrr, L.vd(i), L.vd(i), t2);
    }
    for (int i = 0; i < n; ++i) {
      add_block_transposed(trips, D, L.u(), L.p(i), -t2 * dc.alpha[i]);
      add_block(trips, D, L.p(i), L.u(), -t2 * dc.alpha[i]);
      add_block_transposed(trips, D, L.v(i), L.p(i), -t2);
      add_block(trips, D, L.p(i), L.v(i), -t2);
      for (int j = 0; j < n; ++j)
        add_diag(trips, sys.cell_area, L.p(i), L.p(j), -t2 * nw.lambda1(i, j));
    }
    sys.A.resize(L.total, L.total);
    sys.A.setFromTriplets(trips.begin(), trips.end());
  }

  // RHS map R: G^{k+1} = R y^k + load moments.
  {
    Triplets trips;
    add_block(trips, Ah, L.u(), L.u(), -2.0 * params.mu * t2);
    add_block(trips, DD, L.u(), L.u(), -params.lambda * t2);
    add_block(trips, Mbb, L.u(), L.u(), dc.gamma_u);
    for (int i = 0; i < n; ++i) {
      add_block(trips, Mbb, L.u(), L.v(i), -dc.gamma_i[i]);
      add_block(trips, Mbb, L.v(i), L.u(), -dc.gamma_i[i]);
      add_block(trips, Mbb, L.v(i), L.v(i), dc.gamma_v[i]);
    }
    add_block(trips, Mbr, L.u(), L.ud(), tau * (m_u + 0.5));
    for (int i = 0; i < n; ++i) {
      add_block(trips, Mbr, L.u(), L.vd(i), tau * m_uv[i]);
      add_block(trips, Mbr, L.v(i), L.ud(), tau * m_uv[i]);
      add_block(trips, Mbr, L.v(i), L.vd(i), tau * (params.rho_m[i] + 0.5));
    }
    for (int i = 0; i < n; ++i) {
      add_block_transposed(trips, D, L.u(), L.p(i), t2 * dc.alpha[i]);
      add_block_transposed(trips, D, L.v(i), L.p(i), t2);
    }
    add_block_transposed(trips, Mbr, L.ud(), L.u(), -0.5 * tau);
    add_block(trips, Mrr, L.ud(), L.ud(), -t2);
    for (int i = 0; i < n; ++i) {
      add_block_transposed(trips, Mbr, L.vd(i), L.v(i), -0.5 * tau);
      add_block(trips, Mrr, L.vd(i), L.vd(i), -t2);
    }
    // Mass row: tau^2/4 (D31 u + D32 v) - tau^2/4 (tau/2 L33 - D33) p.
    for (int i = 0; i < n; ++i) {
      add_block(trips, D, L.p(i), L.u(), -t2 * dc.alpha[i]);
      add_block(trips, D, L.p(i), L.v(i), -t2);
      for (int j = 0; j < n; ++j) {
        double coef;
        if (i == j) {
          double offsum = params.beta_tilde.row(i).sum() - params.beta_tilde(i, i);
          coef = -t2 * (params.c_p[i] - 0.5 * tau * offsum);
        } else {
          coef = -t2 * 0.5 * tau * params.beta_tilde(i, j);
        }
        add_diag(trips, sys.cell_area, L.p(i), L.p(j), coef);
      }
    }
    sys.R.resize(L.total, L.total);
    sys.R.setFromTriplets(trips.begin(), trips.end());
  }

  // Block-diagonal preconditioner: B_uv on (u, v, udot, vdot), B_p on p.
  {
    const int uv_size = L.p(0);
    Triplets trips;
    add_block(trips, Ah, L.u(), L.u(), 2.0 * params.mu * t2);
    add_block(trips, DD, L.u(), L.u(), params.lambda * t2);
    add_block(trips, Mbb, L.u(), L.u(), dc.gamma_u);
    double s_uu = dc.alpha.dot(nw.lambda_inv * dc.alpha);
    add_block(trips, DD, L.u(), L.u(), t2 * s_uu);
    for (int j = 0; j < n; ++j) {
      double s_uv = dc.alpha.dot(nw.lambda_inv.col(j));
      add_block(trips, DD, L.u(), L.v(j), t2 * s_uv);
      add_block(trips, DD, L.v(j), L.u(), t2 * s_uv);
      add_block(trips, Mbb, L.u(), L.v(j), -dc.gamma_i[j]);
      add_block(trips, Mbb, L.v(j), L.u(), -dc.gamma_i[j]);
      for (int i = 0; i < n; ++i) add_block(trips, DD, L.v(i), L.v(j), t2 * nw.lambda_inv(i, j));
      add_block(trips, Mbb, L.v(j), L.v(j), dc.gamma_v[j]);
    }
    add_block(trips, Mbr, L.u(), L.ud(), -0.5 * tau);
    add_block_transposed(trips, Mbr, L.ud(), L.u(), -0.5 * tau);
    add_block(trips, Mrr, L.ud(), L.ud(), t2);
    for (int i = 0; i < n; ++i) {
      add_block(trips, Mbr, L.v(i), L.vd(i), -0.5 * tau);
      add_block_transposed(trips, Mbr, L.vd(i), L.v(i), -0.5 * tau);
      add_block(trips, Mrr, L.vd(i), L.vd(i), t2);
    }
    sys.Buv.resize(uv_size, uv_size);
    sys.Buv.setFromTriplets(trips.begin(), trips.end());

    Triplets ptrips;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        add_diag(ptrips, sys.cell_area, i * L.np, j * L.np, t2 * nw.lambda(i, j));
    sys.Bp.resize(n * L.np, n * L.np);
    sys.Bp.setFromTriplets(ptrips.begin(), ptrips.end());

    Triplets wtrips;
    add_block(wtrips, sys.Buv, 0, 0, 1.0);
    add_block(wtrips, sys.Bp, uv_size, uv_size, 1.0);
    sys.W.resize(L.total, L.total);
    sys.W.setFromTriplets(wtrips.begin(), wtrips.end());
  }

  return sys;
}

std::pair<SpMat, SpMat> assemble_preconditioner(const Mesh& mesh, const MpetParameters& params,
                                                const DgConfig& dg) {
  BlockSystem sys = assemble_operator(mesh, params, dg);
  return {std::move(sys.Buv), std::move(sys.Bp)};
}

Eigen::VectorXd assemble_load_vector(const BlockSystem& sys, const LoadSpec& loads, double t_k) {
  const double tau = sys.params.tau;
  const double t2 = 0.25 * tau * tau;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.layout.total);

  auto at_time = [](const TimeVectorField& f, double t) {
    return [&f, t](const Eigen::Vector2d& x) { return f(x, t); };
  };

  if (loads.f) {
    Eigen::VectorXd mk = assemble_load_moments(sys.mesh, sys.bdm1, at_time(loads.f, t_k));
    Eigen::VectorXd mk1 = assemble_load_moments(sys.mesh, sys.bdm1, at_time(loads.f, t_k + tau));
    rhs.segment(sys.layout.u(), sys.layout.nb) = t2 * (mk + mk1);
  }
  for (int i = 0; i < sys.layout.n && i < static_cast<int>(loads.g.size()); ++i) {
    if (!loads.g[i]) continue;
    Eigen::VectorXd mk = assemble_load_moments(sys.mesh, sys.bdm1, at_time(loads.g[i], t_k));
    Eigen::VectorXd mk1 = assemble_load_moments(sys.mesh, sys.bdm1, at_time(loads.g[i], t_k + tau));
    rhs.segment(sys.layout.v(i), sys.layout.nb) = t2 * (mk + mk1);
  }
  return rhs;
}

Eigen::VectorXd assemble_rhs(const BlockSystem& sys, const State& state_k, const LoadSpec& loads,
                             double t_k) {
  const double tol = 1e-12 * std::max(1.0, sys.params.t_final);
  if (t_k < -tol || t_k + sys.params.tau > sys.params.t_final + tol)
    throw std::out_of_range("assemble_rhs: time step leaves [0, t_final]");
  return sys.R * sys.pack(state_k) + assemble_load_vector(sys, loads, t_k);
}

}  // namespace mpet
