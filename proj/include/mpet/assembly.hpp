#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mpet/fem.hpp"
#include "mpet/mesh.hpp"
#include "mpet/model.hpp"
#include "mpet/state.hpp"

namespace mpet {

using TimeVectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)>;

/// Body force f(x,t) and per-network g_i(x,t); empty functions mean zero.
struct LoadSpec {
  TimeVectorField f;
  std::vector<TimeVectorField> g;

  static LoadSpec zero(int n) { return LoadSpec{nullptr, std::vector<TimeVectorField>(n)}; }
};

/// Offsets of the (u, v_1..n, udot, vdot_1..n, p_1..n) blocks inside the
/// packed coefficient vector.
struct BlockLayout {
  int n = 0;
  int nb = 0;  // constrained BDM1 dofs
  int nr = 0;  // constrained RT0 dofs
  int np = 0;  // P0 dofs (triangles)
  int total = 0;

  int u() const { return 0; }
  int v(int i) const { return nb * (1 + i); }
  int ud() const { return nb * (1 + n); }
  int vd(int i) const { return nb * (1 + n) + nr * (1 + i); }
  int p(int i) const { return nb * (1 + n) + nr * (1 + n) + np * i; }
};

/// Assembled time-step operator A, the linear map R with G^{k+1} = R y^k +
/// load moments, the preconditioner blocks B_uv / B_p, and the norm Gram
/// W = blkdiag(B_uv, B_p), all on the boundary-constrained spaces.
struct BlockSystem {
  Mesh mesh;
  MpetParameters params;
  DerivedCoefficients derived;
  NormWeights weights;
  DgConfig dg;

  /// Displacements and velocities share the BDM1 space: the trapezoidal
  /// velocity rows then hold as exact vector identities and the scheme is
  /// algebraically Crank-Nicolson (second order). A strictly smaller
  /// velocity space loses the non-projected velocity component each step
  /// and drops to first order. div BDM1(T) = P0(T), so strong mass
  /// conservation is unaffected.
  DofMap bdm1, vel, p0;
  BlockLayout layout;

  SpMat A;
  SpMat R;
  SpMat Buv;
  SpMat Bp;
  SpMat W;
  Eigen::VectorXd cell_area;

  /// Removes the per-network weighted mean (int p_i = 0) from the pressure
  /// blocks of a packed vector.
  void project_zero_mean(Eigen::VectorXd& x) const;

  Eigen::VectorXd pack(const State& s) const;
  State unpack(const Eigen::VectorXd& x, double t) const;

  /// Euclidean-orthonormal basis of the zero-mean-constrained subspace
  /// (identity on displacement/velocity blocks, per-network mean deflation
  /// on pressures); total x (total - n).
  Eigen::MatrixXd deflation_basis() const;

  double w_norm(const Eigen::VectorXd& x) const { return std::sqrt(std::max(0.0, x.dot(W * x))); }
};

BlockSystem assemble_operator(const Mesh& mesh, const MpetParameters& params, const DgConfig& dg = {});

/// The preconditioner blocks alone: B_uv on the displacement/velocity
/// fields, B_p = tau^2/4 (Lambda (x) P0 mass) on the pressures.
std::pair<SpMat, SpMat> assemble_preconditioner(const Mesh& mesh, const MpetParameters& params,
                                                const DgConfig& dg = {});

/// Load-moment part of G^{k+1}: tau^2/4 (f^k + f^{k+1}) and per-network
/// tau^2/4 (g_i^k + g_i^{k+1}) moments in the momentum rows.
Eigen::VectorXd assemble_load_vector(const BlockSystem& sys, const LoadSpec& loads, double t_k);

/// Full right-hand side G^{k+1} = R y^k + load moments. Throws if t_k or
/// t_k + tau leaves [0, t_final] (tolerating roundoff).
Eigen::VectorXd assemble_rhs(const BlockSystem& sys, const State& state_k, const LoadSpec& loads,
                             double t_k);

}  // namespace mpet
