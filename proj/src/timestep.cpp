#include "mpet/timestep.hpp"

#include <cmath>
#include <stdexcept>

namespace mpet {

State initial_state(const BlockSystem& sys, const InitialData& data) {
  const int n = sys.layout.n;
  State s;
  s.t = 0.0;
  auto vec_or_zero = [&](const DofMap& map, const VectorField& f) {
    return f ? interpolate(sys.mesh, map, f) : Eigen::VectorXd::Zero(map.n_global).eval();
  };
  s.u = vec_or_zero(sys.bdm1, data.u0);
  s.ud = vec_or_zero(sys.vel, data.u1);
  s.v.resize(n);
  s.vd.resize(n);
  s.p.resize(n);
  for (int i = 0; i < n; ++i) {
    s.v[i] = vec_or_zero(sys.bdm1, i < (int)data.v0.size() ? data.v0[i] : VectorField{});
    s.vd[i] = vec_or_zero(sys.vel, i < (int)data.v1.size() ? data.v1[i] : VectorField{});
    if (i < (int)data.p0.size() && data.p0[i])
      s.p[i] = interpolate(sys.mesh, sys.p0, data.p0[i]);
    else
      s.p[i] = Eigen::VectorXd::Zero(sys.layout.np);
  }
  Eigen::VectorXd x = sys.pack(s);
  sys.project_zero_mean(x);
  return sys.unpack(x, 0.0);
}

TimeStepper::TimeStepper(const BlockSystem& sys, LoadSpec loads, StepOptions options)
    : sys_(&sys), loads_(std::move(loads)), options_(options) {
  if (options_.solver == StepSolver::Direct) direct_.emplace(sys);
}

State TimeStepper::step(const State& state_k) {
  const double tol = 1e-12 * std::max(1.0, sys_->params.t_final);
  if (state_k.t < -tol || state_k.t + sys_->params.tau > sys_->params.t_final + tol)
    throw std::out_of_range("step: time step leaves [0, t_final]");
  Eigen::VectorXd rhs = assemble_rhs(*sys_, state_k, loads_, state_k.t);
  State next;
  if (options_.solver == StepSolver::Direct) {
    Eigen::VectorXd y = direct_->solve(rhs);
    next = sys_->unpack(y, state_k.t + sys_->params.tau);
  } else {
    auto [y, stats] = minres(*sys_, rhs, options_.tol, options_.max_iter);
    if (stats.breakdown) throw std::runtime_error("step: minres breakdown");
    next = sys_->unpack(y, state_k.t + sys_->params.tau);
    next.minres_iterations = stats.iterations;
    next.minres_residual = stats.relative_residual;
  }
  next.mass_residual_max = mass_residual(state_k, next, *sys_).cwiseAbs().maxCoeff();
  return next;
}

State step(const BlockSystem& sys, const State& state_k, const LoadSpec& loads, StepOptions options) {
  return TimeStepper(sys, loads, options).step(state_k);
}

Eigen::MatrixXd mass_residual(const State& state_k, const State& state_k1, const BlockSystem& sys) {
  Eigen::VectorXd lhs = sys.A * sys.pack(state_k1);
  Eigen::VectorXd rhs = sys.R * sys.pack(state_k);
  Eigen::MatrixXd res(sys.layout.np, sys.layout.n);
  for (int i = 0; i < sys.layout.n; ++i)
    res.col(i) = lhs.segment(sys.layout.p(i), sys.layout.np) - rhs.segment(sys.layout.p(i), sys.layout.np);
  return res;
}

double velocity_consistency_residual(const BlockSystem& sys, const State& state_k,
                                     const State& state_k1) {
  Eigen::VectorXd lhs = sys.A * sys.pack(state_k1);
  Eigen::VectorXd rhs = sys.R * sys.pack(state_k);
  const int lo = sys.layout.ud();
  const int len = sys.layout.nr * (1 + sys.layout.n);
  double num = (lhs.segment(lo, len) - rhs.segment(lo, len)).norm();
  double den = std::max({lhs.norm(), rhs.norm(), 1e-300});
  return num / den;
}

RunSummary run(const BlockSystem& sys, const LoadSpec& loads, const InitialData& initial,
               int n_steps, StepOptions options) {
  RunSummary out;
  TimeStepper stepper(sys, loads, options);
  State s = initial_state(sys, initial);
  out.steps.reserve(n_steps);
  for (int k = 0; k < n_steps; ++k) {
    State next;
    try {
      next = stepper.step(s);
    } catch (const std::exception& e) {
      throw std::runtime_error("run: step " + std::to_string(k + 1) + " failed: " + e.what());
    }
    StepDiagnostics d;
    d.step = k + 1;
    d.t = next.t;
    d.iterations = next.minres_iterations;
    d.residual = next.minres_residual;
    d.mass_residual_max = next.mass_residual_max;
    d.w_norm = sys.w_norm(sys.pack(next));
    out.steps.push_back(d);
    s = std::move(next);
  }
  out.final_state = std::move(s);
  return out;
}

ConvergenceResult run_convergence(const Mesh& mesh, const MpetParameters& params, const DgConfig& dg,
                                  const LoadSpec& loads, const InitialData& initial,
                                  const std::vector<double>& tau_list, double t_common) {
  if (tau_list.size() < 2) throw std::invalid_argument("run_convergence: need at least two step sizes");

  ConvergenceResult out;
  out.taus = tau_list;

  std::vector<Eigen::VectorXd> finals;
  BlockSystem finest;
  for (size_t j = 0; j < tau_list.size(); ++j) {
    double tau = tau_list[j];
    double ratio = t_common / tau;
    int n_steps = static_cast<int>(std::lround(ratio));
    if (n_steps < 1 || std::abs(ratio - n_steps) > 1e-9 * std::max(1.0, ratio))
      throw std::invalid_argument("run_convergence: tau must divide the common final time");

    MpetParameters p = params;
    p.tau = tau;
    p.t_final = t_common;
    BlockSystem sys = assemble_operator(mesh, p, dg);
    RunSummary summary = run(sys, loads, initial, n_steps);
    finals.push_back(sys.pack(summary.final_state));
    if (j + 1 == tau_list.size()) finest = std::move(sys);
  }

  double scale = std::max(1e-300, finest.w_norm(finals.back()));
  for (size_t j = 0; j + 1 < finals.size(); ++j)
    out.diffs.push_back(finest.w_norm(finals[j] - finals[j + 1]));
  for (size_t j = 0; j + 1 < out.diffs.size(); ++j) {
    if (out.diffs[j + 1] <= 1e-12 * scale) {
      out.machine_precision = true;
      out.rates.push_back(0.0);
    } else {
      out.rates.push_back(std::log2(out.diffs[j] / out.diffs[j + 1]));
    }
  }
  if (!out.diffs.empty() && out.diffs.front() <= 1e-12 * scale) out.machine_precision = true;
  return out;
}

}  // namespace mpet
