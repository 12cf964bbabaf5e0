#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mpet/mesh.hpp"

namespace mpet {

using SpMat = Eigen::SparseMatrix<double>;
using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
using ScalarField = std::function<double(const Eigen::Vector2d&)>;

enum class SpaceKind { BDM1, RT0, P0 };

/// Interior-penalty configuration for the DG elasticity form.
struct DgConfig {
  double eta = 10.0;     // tangential-jump penalty, must be > 0
  int quad_degree = 4;   // triangle rule exactness (edge rule is degree 3)
};

/// Local-to-global indexing for one space on one mesh. Boundary-constrained
/// maps eliminate the normal-component DOFs on boundary edges: eliminated
/// slots carry index -1 and the global numbering skips them.
struct DofMap {
  SpaceKind kind = SpaceKind::P0;
  bool constrained = false;
  int n_global = 0;
  int dofs_per_tri = 0;
  /// tri_dofs[t * dofs_per_tri + l] -> global index or -1.
  std::vector<int> tri_dofs;
  /// Entity-major numbering: BDM1 has two slots per edge (lower/higher
  /// endpoint), RT0 one per edge, P0 one per triangle; -1 if eliminated.
  std::vector<int> entity_dofs;
  /// H(div) spaces: +1 when the stored edge normal is outward for the
  /// triangle, -1 otherwise; indexed (t, local edge).
  std::vector<std::array<signed char, 3>> edge_signs;
  /// Unconstrained maps only: true for DOFs sitting on boundary edges.
  std::vector<bool> boundary_dof;

  int operator()(int t, int l) const { return tri_dofs[t * dofs_per_tri + l]; }
};

DofMap build_dofmap(const Mesh& mesh, SpaceKind kind, bool constrain_boundary);

/// Per-triangle basis data. BDM1 local bases are the six vector P1 functions
/// dual to the endpoint values of the normal component against the global
/// edge normal; RT0 bases have unit constant normal component against the
/// global normal of their edge.
struct ElementBasis {
  int n = 0;
  // value(x) = vec_const[l] + vec_lin[l] * x, gradient = vec_lin[l] (constant).
  std::array<Eigen::Vector2d, 6> vec_const;
  std::array<Eigen::Matrix2d, 6> vec_lin;
  std::array<double, 6> div;  // constant per basis function

  Eigen::Vector2d value(int l, const Eigen::Vector2d& x) const {
    return vec_const[l] + vec_lin[l] * x;
  }
  const Eigen::Matrix2d& grad(int l) const { return vec_lin[l]; }
  Eigen::Matrix2d strain(int l) const {
    return 0.5 * (vec_lin[l] + vec_lin[l].transpose());
  }
};

/// Basis data for every triangle; P0 is handled separately (indicator, value 1).
std::vector<ElementBasis> build_element_bases(const Mesh& mesh, SpaceKind kind);

/// Triangle quadrature rule exact for the requested polynomial degree
/// (supported: <= 4), points in barycentric coordinates.
struct TriQuadrature {
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> weight;  // sums to 1, scale by triangle area
};
const TriQuadrature& triangle_rule(int degree);

/// Gauss rule on [0,1], exact for degree <= 2*npts-1.
struct EdgeQuadrature {
  std::vector<double> point;
  std::vector<double> weight;  // sums to 1, scale by edge length
};
const EdgeQuadrature& edge_rule(int npts);

/// L2 pairing matrix int phi_i . psi_j (vector spaces) or int q_i q_j (P0);
/// rectangular BDM1 x RT0 couplings are allowed. Both maps must live on the
/// same mesh.
SpMat assemble_mass(const Mesh& mesh, const DofMap& row, const DofMap& col);

/// Divergence pairing: rows over P0, columns over a BDM1/RT0 map,
/// entry int_T (div phi_j) q_i. Exact (elementwise-constant divergence).
SpMat assemble_div(const Mesh& mesh, const DofMap& vec, const DofMap& p0);

/// int div(phi_i) div(phi_j), assembled elementwise (exact).
SpMat assemble_div_div(const Mesh& mesh, const DofMap& vec);

/// Interior-penalty DG elasticity form a_h on a BDM1 map: volume strain
/// product, the two consistency terms on {eps(.)} . [._t], and the
/// eta h_e^{-1} [u_t].[w_t] penalty, edges summed over interior and boundary.
SpMat assemble_dg_elasticity(const Mesh& mesh, const DofMap& bdm1, const DgConfig& config);

/// Gram matrices of the mesh-dependent norms on a BDM1 map.
/// kind: 'h' -> strain volume term, '1' -> full-gradient volume term; both
/// include the h_e^{-1} tangential-jump term. At order 1 the DG norm equals
/// the 1,h norm (elementwise second derivatives vanish).
SpMat assemble_norm_gram(const Mesh& mesh, const DofMap& bdm1, char kind);

struct DgNorms {
  double h = 0.0;      // strain + jumps
  double one_h = 0.0;  // gradient + jumps
  double dg = 0.0;     // == one_h at order 1
};
DgNorms dg_norms(const Mesh& mesh, const DofMap& bdm1, const Eigen::VectorXd& coefficients);

/// Canonical interpolation: edge moments of u.n for BDM1/RT0 (endpoint
/// values resp. edge average), cell averages for P0. Constrained maps drop
/// the boundary moments.
Eigen::VectorXd interpolate(const Mesh& mesh, const DofMap& map, const VectorField& field);
Eigen::VectorXd interpolate(const Mesh& mesh, const DofMap& map, const ScalarField& field);

/// Moment vector int f . phi_i over a vector-space map (load assembly).
Eigen::VectorXd assemble_load_moments(const Mesh& mesh, const DofMap& map, const VectorField& field,
                                      int quad_degree = 4);

}  // namespace mpet
