#include "mpet/verify.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cstdio>
#include <random>
#include <thread>

#include "mpet/solver.hpp"

namespace mpet {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SweepRow run_point(const SweepConfig& cfg, int index, int n, int nx, double mu, double lambda,
                   double K, double c_p, double beta, double tau) {
  SweepRow row;
  row.index = index;
  row.n = n;
  row.nx = nx;
  row.mu = mu;
  row.lambda = lambda;
  row.K = K;
  row.c_p = c_p;
  row.beta = beta;
  row.tau = tau;

  try {
    MpetParameters params = MpetParameters::defaults(n, beta);
    params.mu = mu;
    params.lambda = lambda;
    params.K.setConstant(K);
    params.c_p.setConstant(c_p);
    params.tau = tau;
    params.t_final = tau;

    Mesh mesh = build_structured_mesh(nx, nx);
    BlockSystem sys = assemble_operator(mesh, params, DgConfig{cfg.eta, 4});
    if (cfg.identity_hook) sys.A = sys.W;
    row.dofs = sys.layout.total;

    if (cfg.run_spectrum && sys.layout.total <= cfg.dense_cap) {
      Spectrum sp = spectrum(sys, cfg.dense_cap);
      row.min_xi = sp.min_abs;
      row.max_xi = sp.max_abs;
      row.kappa = sp.kappa;
    }

    if (cfg.run_minres) {
      std::mt19937_64 rng(cfg.seed + static_cast<unsigned long long>(index));
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::VectorXd rhs(sys.layout.total);
      for (int i = 0; i < rhs.size(); ++i) rhs[i] = gauss(rng);
      auto [x, stats] = minres(sys, rhs, cfg.tol, cfg.max_iter);
      (void)x;
      row.iterations = stats.iterations;
      row.relres = stats.relative_residual;
      row.converged = stats.converged;
      if (stats.breakdown) {
        row.ok = false;
        row.error = "minres breakdown";
      }
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::size_t SweepConfig::grid_size() const {
  std::size_t m = mesh.empty() ? 1 : mesh.size();
  return mu.size() * lambda.size() * K.size() * c_p.size() * beta.size() * tau.size() * n.size() * m;
}

std::vector<SweepRow> sweep(const SweepConfig& config) {
  std::vector<int> meshes = config.mesh.empty() ? std::vector<int>{config.nx} : config.mesh;

  struct Point {
    int n, nx;
    double mu, lambda, K, c_p, beta, tau;
  };
  std::vector<Point> points;
  points.reserve(config.grid_size());
  for (int n : config.n)
    for (int nx : meshes)
      for (double mu : config.mu)
        for (double lambda : config.lambda)
          for (double K : config.K)
            for (double c_p : config.c_p)
              for (double beta : config.beta)
                for (double tau : config.tau)
                  points.push_back({n, nx, mu, lambda, K, c_p, beta, tau});

  std::vector<SweepRow> rows(points.size());
  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Point& p = points[i];
      rows[i] = run_point(config, static_cast<int>(i), p.n, p.nx, p.mu, p.lambda, p.K, p.c_p, p.beta,
                          p.tau);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= points.size()) return;
        const Point& p = points[i];
        rows[i] = run_point(config, static_cast<int>(i), p.n, p.nx, p.mu, p.lambda, p.K, p.c_p,
                            p.beta, p.tau);
      }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "index,n,nx,mu,lambda,K,c_p,beta,tau,dofs,min_xi,max_xi,kappa,iterations,relres,status\n";
  for (const auto& r : rows) {
    out += std::to_string(r.index) + "," + std::to_string(r.n) + "," + std::to_string(r.nx) + "," +
           fmt(r.mu) + "," + fmt(r.lambda) + "," + fmt(r.K) + "," + fmt(r.c_p) + "," + fmt(r.beta) +
           "," + fmt(r.tau) + "," + std::to_string(r.dofs) + "," + fmt(r.min_xi) + "," +
           fmt(r.max_xi) + "," + fmt(r.kappa) + "," + std::to_string(r.iterations) + "," +
           fmt(r.relres) + "," + (r.ok ? "ok" : r.error) + "\n";
  }
  return out;
}

namespace {

double min_gen_eig(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::Ax_lBx);
  return es.eigenvalues().minCoeff();
}

double max_gen_eig(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::Ax_lBx);
  return es.eigenvalues().maxCoeff();
}

/// Euclidean-orthonormal basis of { q : area . q = 0 }.
Eigen::MatrixXd mean_deflation(const Eigen::VectorXd& area) {
  const int m = static_cast<int>(area.size());
  Eigen::VectorXd v = area.normalized();
  v[0] += (v[0] >= 0.0 ? 1.0 : -1.0);
  v.normalize();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m) - 2.0 * v * v.transpose();
  return H.rightCols(m - 1);
}

}  // namespace

std::vector<FemConstants> measure_fem_constants(const std::vector<int>& mesh_sizes, double eta) {
  std::vector<FemConstants> out;
  for (int nx : mesh_sizes) {
    Mesh mesh = build_structured_mesh(nx, nx);
    DofMap bdm1 = build_dofmap(mesh, SpaceKind::BDM1, true);
    DofMap p0 = build_dofmap(mesh, SpaceKind::P0, false);

    Eigen::MatrixXd Ah = Eigen::MatrixXd(assemble_dg_elasticity(mesh, bdm1, DgConfig{eta, 4}));
    Eigen::MatrixXd Gh = Eigen::MatrixXd(assemble_norm_gram(mesh, bdm1, 'h'));
    Eigen::MatrixXd G1 = Eigen::MatrixXd(assemble_norm_gram(mesh, bdm1, '1'));
    Eigen::MatrixXd M = Eigen::MatrixXd(assemble_mass(mesh, bdm1, bdm1));
    Eigen::MatrixXd D = Eigen::MatrixXd(assemble_div(mesh, bdm1, p0));
    Eigen::MatrixXd DD = Eigen::MatrixXd(assemble_div_div(mesh, bdm1));
    Eigen::VectorXd area = Eigen::Map<const Eigen::VectorXd>(mesh.tri_area.data(), mesh.n_triangles());
    Eigen::MatrixXd Mp = area.asDiagonal();

    FemConstants c;
    c.nx = nx;
    // The DG norm coincides with the 1,h norm at order 1.
    c.alpha_a = min_gen_eig(Ah, Gh);
    c.c2 = max_gen_eig(Ah, G1);
    c.c0 = max_gen_eig(G1, Gh);
    c.c1 = min_gen_eig(Gh, G1);
    c.c3 = max_gen_eig(M, G1);

    Eigen::MatrixXd Q = mean_deflation(area);
    Eigen::MatrixXd MpQ = Q.transpose() * Mp * Q;

    Eigen::MatrixXd Sv = D * (M + DD).ldlt().solve(D.transpose());
    c.beta_v = std::sqrt(std::max(0.0, min_gen_eig(Q.transpose() * Sv * Q, MpQ)));

    Eigen::MatrixXd Ss = D * G1.ldlt().solve(D.transpose());
    c.beta_s = std::sqrt(std::max(0.0, min_gen_eig(Q.transpose() * Ss * Q, MpQ)));

    out.push_back(c);
  }
  return out;
}

std::string constants_csv(const std::vector<FemConstants>& rows) {
  std::string out = "nx,alpha_a,c0,c1,c2,c3,beta_s,beta_v\n";
  for (const auto& r : rows) {
    out += std::to_string(r.nx) + "," + fmt(r.alpha_a) + "," + fmt(r.c0) + "," + fmt(r.c1) + "," +
           fmt(r.c2) + "," + fmt(r.c3) + "," + fmt(r.beta_s) + "," + fmt(r.beta_v) + "\n";
  }
  return out;
}

double relative_spread(const std::vector<double>& values) {
  double lo = values.front(), hi = values.front();
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return (hi - lo) / lo;
}

}  // namespace mpet
