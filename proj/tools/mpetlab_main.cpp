#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mpet/config.hpp"
#include "mpet/io.hpp"
#include "mpet/solver.hpp"
#include "mpet/timestep.hpp"
#include "mpet/verify.hpp"

namespace {

bool g_quiet = false;

void info(const std::string& msg) {
  if (!g_quiet) std::cerr << "[mpetlab] " << msg << "\n";
}

/// Relative paths fall back to $MPETLAB_CONFIG_DIR when not found as given.
std::string resolve_config_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path) || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv("MPETLAB_CONFIG_DIR")) {
    fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void print_matrix(const std::string& name, const Eigen::MatrixXd& M) {
  std::cout << name << " =\n";
  for (int i = 0; i < M.rows(); ++i) {
    std::cout << " ";
    for (int j = 0; j < M.cols(); ++j) std::cout << " " << fmt(M(i, j));
    std::cout << "\n";
  }
}

void write_or_print(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  out << text;
}

/// Smooth oscillatory benchmark loading used by `solve`, `run` and
/// `converge-time`.
mpet::LoadSpec benchmark_loads(int n) {
  mpet::LoadSpec loads = mpet::LoadSpec::zero(n);
  loads.f = [](const Eigen::Vector2d& x, double t) {
    return Eigen::Vector2d(std::sin(2.0 * t) * std::sin(M_PI * x.x()),
                           std::cos(3.0 * t) * x.y() * (1.0 - x.y()));
  };
  for (int i = 0; i < n; ++i) {
    double phase = 1.0 + i;
    loads.g[i] = [phase](const Eigen::Vector2d& x, double t) {
      return Eigen::Vector2d(std::cos(phase * t) * x.x() * (1.0 - x.x()),
                             std::sin(phase * t) * std::sin(M_PI * x.y()));
    };
  }
  return loads;
}

int cmd_derive(const std::string& params_path) {
  mpet::MpetParameters p = mpet::load_parameters_file(resolve_config_path(params_path));
  mpet::DerivedCoefficients d = mpet::derive_coefficients(p);
  mpet::NormWeights w = mpet::build_norm_weights(p, d);

  std::cout << "n = " << p.n << "\n";
  std::cout << "tau = " << fmt(p.tau) << "\n";
  std::cout << "gamma_u = " << fmt(d.gamma_u) << "\n";
  std::cout << "gamma = " << fmt(d.gamma) << "\n";
  for (int i = 0; i < p.n; ++i) {
    std::cout << "alpha_" << (i + 1) << " = " << fmt(d.alpha[i]) << "\n";
    std::cout << "gamma_" << (i + 1) << " = " << fmt(d.gamma_i[i]) << "\n";
    std::cout << "gamma_v_" << (i + 1) << " = " << fmt(d.gamma_v[i]) << "\n";
  }
  print_matrix("beta", d.beta);
  print_matrix("Lambda1", w.lambda1);
  print_matrix("Lambda2", w.lambda2);
  print_matrix("Lambda3", w.lambda3);
  print_matrix("Lambda", w.lambda);
  print_matrix("Lambda_uv", w.lambda_uv);
  std::cout << "Lambda_condition = " << fmt(w.lambda_condition) << "\n";
  return 0;
}

int cmd_lemmas(int draws, unsigned long long seed) {
  mpet::LemmaCheckSummary sum = mpet::run_lemma_checks(draws, seed);
  std::cout << sum.passed << "/" << sum.draws << " passed"
            << " (worst determinant error " << fmt(sum.worst_rel_error) << ")\n";
  if (sum.passed != sum.draws) {
    std::cerr << "[mpetlab] first failure: " << sum.first_failure << "\n";
    return 1;
  }
  return 0;
}

int cmd_assemble(const std::string& params_path, int nx, int ny, double eta,
                 const std::string& out_dir) {
  mpet::MpetParameters p = mpet::load_parameters_file(resolve_config_path(params_path));
  mpet::Mesh mesh = mpet::build_structured_mesh(nx, ny > 0 ? ny : nx);
  mpet::BlockSystem sys = mpet::assemble_operator(mesh, p, mpet::DgConfig{eta, 4});
  mpet::export_system(sys, out_dir);
  info("wrote A.mtx, W.mtx, Buv.mtx, Bp.mtx, blocks.json to " + out_dir);
  return 0;
}

int cmd_solve(const std::string& params_path, int nx, double tol, bool direct) {
  mpet::MpetParameters p = mpet::load_parameters_file(resolve_config_path(params_path));
  mpet::Mesh mesh = mpet::build_structured_mesh(nx, nx);
  mpet::BlockSystem sys = mpet::assemble_operator(mesh, p);
  mpet::LoadSpec loads = benchmark_loads(p.n);
  mpet::State s0 = mpet::initial_state(sys, mpet::InitialData::zero(p.n));

  mpet::StepOptions opts;
  opts.solver = direct ? mpet::StepSolver::Direct : mpet::StepSolver::Minres;
  opts.tol = tol;
  mpet::TimeStepper stepper(sys, loads, opts);
  mpet::State s1 = stepper.step(s0);

  std::cout << "dofs,iterations,relres,mass_residual_max,w_norm\n";
  std::cout << sys.layout.total << "," << s1.minres_iterations << ","
            << mpet::format_double(s1.minres_residual) << ","
            << mpet::format_double(s1.mass_residual_max) << ","
            << mpet::format_double(sys.w_norm(sys.pack(s1))) << "\n";
  return 0;
}

int cmd_run(const std::string& params_path, int nx, int steps, const std::string& out_path,
            bool minres_steps, double tol) {
  mpet::MpetParameters p = mpet::load_parameters_file(resolve_config_path(params_path));
  if (steps * p.tau > p.t_final + 1e-12) throw std::runtime_error("run: steps * tau exceeds t_final");
  mpet::Mesh mesh = mpet::build_structured_mesh(nx, nx);
  mpet::BlockSystem sys = mpet::assemble_operator(mesh, p);
  mpet::StepOptions opts;
  opts.solver = minres_steps ? mpet::StepSolver::Minres : mpet::StepSolver::Direct;
  opts.tol = tol;
  mpet::RunSummary summary =
      mpet::run(sys, benchmark_loads(p.n), mpet::InitialData::zero(p.n), steps, opts);

  std::string csv = "step,t,iterations,residual,mass_residual_max,w_norm\n";
  for (const auto& d : summary.steps) {
    csv += std::to_string(d.step) + "," + mpet::format_double(d.t) + "," +
           std::to_string(d.iterations) + "," + mpet::format_double(d.residual) + "," +
           mpet::format_double(d.mass_residual_max) + "," + mpet::format_double(d.w_norm) + "\n";
  }
  write_or_print(out_path, csv);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, int jobs_override,
              long long seed_override) {
  mpet::SweepConfig cfg = mpet::load_sweep_config_file(resolve_config_path(config_path));
  if (jobs_override > 0) cfg.jobs = jobs_override;
  if (seed_override >= 0) cfg.seed = static_cast<unsigned long long>(seed_override);
  info("sweep over " + std::to_string(cfg.grid_size()) + " points, jobs = " +
       std::to_string(cfg.jobs));
  auto rows = mpet::sweep(cfg);
  write_or_print(out_path, mpet::sweep_csv(rows));
  int failures = 0;
  for (const auto& r : rows)
    if (!r.ok) ++failures;
  if (failures > 0) {
    std::cerr << "[mpetlab] " << failures << " sweep point(s) failed\n";
    return 1;
  }
  return 0;
}

int cmd_constants(const std::vector<int>& meshes, double eta, const std::string& out_path) {
  auto rows = mpet::measure_fem_constants(meshes, eta);
  write_or_print(out_path, mpet::constants_csv(rows));
  return 0;
}

int cmd_converge_time(const std::string& params_path, int nx, std::vector<double> taus,
                      double t_common) {
  mpet::MpetParameters p = mpet::load_parameters_file(resolve_config_path(params_path));
  mpet::Mesh mesh = mpet::build_structured_mesh(nx, nx);
  mpet::ConvergenceResult res =
      mpet::run_convergence(mesh, p, mpet::DgConfig{}, benchmark_loads(p.n),
                            mpet::InitialData::zero(p.n), taus, t_common);
  std::cout << "tau_coarse,tau_fine,diff\n";
  for (std::size_t j = 0; j < res.diffs.size(); ++j)
    std::cout << mpet::format_double(res.taus[j]) << "," << mpet::format_double(res.taus[j + 1])
              << "," << mpet::format_double(res.diffs[j]) << "\n";
  std::cout << "rates";
  for (double r : res.rates) std::cout << "," << mpet::format_double(r);
  std::cout << "\n";
  if (res.machine_precision) {
    info("differences at machine precision; rate is meaningless for this data");
  } else {
    for (double r : res.rates)
      if (r < 1.5 || r > 2.5) info("warning: erratic convergence rate (non-smooth data?)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic multi-network poroelasticity: Crank-Nicolson stepping, strongly "
               "conservative mixed/DG discretization, parameter-robust preconditioning"};
  app.require_subcommand(1);
  app.add_flag("--quiet", g_quiet, "suppress progress logging on stderr");

  std::string params_path, config_path, out_path, out_dir = "export";
  int nx = 4, ny = -1, steps = 10, draws = 1000, jobs = 0;
  long long seed_override = -1;
  unsigned long long seed = 7;
  double eta = 10.0, tol = 1e-8, t_common = 0.5;
  bool direct = false, minres_steps = false;
  std::vector<int> meshes{2, 4, 8};
  std::vector<double> taus{0.1, 0.05, 0.025};

  auto* derive = app.add_subcommand("derive", "print derived coefficients and Lambda matrices");
  derive->add_option("--params", params_path, "parameter TOML file")->required();

  auto* lemmas = app.add_subcommand("lemmas", "randomized determinant and G-matrix bound checks");
  lemmas->add_option("--draws", draws, "number of random draws");
  lemmas->add_option("--seed", seed, "RNG seed");

  auto* assemble = app.add_subcommand("assemble", "export system matrices in Matrix Market form");
  assemble->add_option("--params", params_path)->required();
  assemble->add_option("--mesh", nx, "cells per side");
  assemble->add_option("--ny", ny, "cells in y (defaults to --mesh)");
  assemble->add_option("--eta", eta, "DG penalty");
  assemble->add_option("--out", out_dir, "output directory");

  auto* solve = app.add_subcommand("solve", "one time-step solve with the benchmark loading");
  solve->add_option("--params", params_path)->required();
  solve->add_option("--mesh", nx);
  solve->add_option("--tol", tol, "MINRES relative tolerance");
  solve->add_flag("--direct", direct, "sparse direct solve instead of MINRES");

  auto* runc = app.add_subcommand("run", "trajectory with per-step diagnostics CSV");
  runc->add_option("--params", params_path)->required();
  runc->add_option("--mesh", nx);
  runc->add_option("--steps", steps)->required();
  runc->add_option("--out", out_path, "CSV output file (stdout if omitted)");
  runc->add_flag("--minres", minres_steps, "step with preconditioned MINRES");
  runc->add_option("--tol", tol);

  auto* sweepc = app.add_subcommand("sweep", "parameter-robustness table");
  sweepc->add_option("--config", config_path, "sweep TOML file")->required();
  sweepc->add_option("--out", out_path, "CSV output file (stdout if omitted)");
  sweepc->add_option("--jobs", jobs, "worker threads");
  sweepc->add_option("--seed", seed_override, "override the config seed");

  auto* constants = app.add_subcommand("constants", "measured FEM constants per mesh");
  constants->add_option("--meshes", meshes, "mesh sizes (cells per side)");
  constants->add_option("--eta", eta);
  constants->add_option("--out", out_path);

  auto* conv = app.add_subcommand("converge-time", "temporal self-convergence study");
  conv->add_option("--params", params_path)->required();
  conv->add_option("--mesh", nx);
  conv->add_option("--taus", taus, "step sizes, each dividing --t-final");
  conv->add_option("--t-final", t_common, "common final time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (*derive) return cmd_derive(params_path);
    if (*lemmas) return cmd_lemmas(draws, seed);
    if (*assemble) return cmd_assemble(params_path, nx, ny, eta, out_dir);
    if (*solve) return cmd_solve(params_path, nx, tol, direct);
    if (*runc) return cmd_run(params_path, nx, steps, out_path, minres_steps, tol);
    if (*sweepc) return cmd_sweep(config_path, out_path, jobs, seed_override);
    if (*constants) return cmd_constants(meshes, eta, out_path);
    if (*conv) return cmd_converge_time(params_path, nx, taus, t_common);
  } catch (const std::exception& e) {
    std::cerr << "[mpetlab] error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
