#include "mpet/fem.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace mpet {

namespace {

void check_same_mesh(const Mesh& mesh, const DofMap& map, const char* where) {
  if (static_cast<int>(map.tri_dofs.size()) != mesh.n_triangles() * map.dofs_per_tri)
    throw std::invalid_argument(std::string(where) + ": dofmap does not match mesh");
}

Eigen::Vector2d bary_to_physical(const Eigen::Matrix<double, 2, 3>& coords, const Eigen::Vector3d& b) {
  return coords * b;
}

}  // namespace

DofMap build_dofmap(const Mesh& mesh, SpaceKind kind, bool constrain_boundary) {
  DofMap map;
  map.kind = kind;
  map.constrained = constrain_boundary;

  const int nt = mesh.n_triangles();
  const int ne = mesh.n_edges();

  if (kind == SpaceKind::P0) {
    map.dofs_per_tri = 1;
    map.n_global = nt;
    map.tri_dofs.resize(nt);
    map.entity_dofs.resize(nt);
    for (int t = 0; t < nt; ++t) map.tri_dofs[t] = map.entity_dofs[t] = t;
    map.boundary_dof.assign(nt, false);
    return map;
  }

  const int per_edge = (kind == SpaceKind::BDM1) ? 2 : 1;
  map.dofs_per_tri = 3 * per_edge;

  map.entity_dofs.assign(ne * per_edge, -1);
  int next = 0;
  for (int e = 0; e < ne; ++e) {
    if (constrain_boundary && mesh.boundary_edge[e]) continue;
    for (int m = 0; m < per_edge; ++m) map.entity_dofs[e * per_edge + m] = next++;
  }
  map.n_global = next;

  map.tri_dofs.resize(nt * map.dofs_per_tri);
  map.edge_signs.resize(nt);
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      int e = mesh.tri_edges[t][k];
      double s = mesh.edge_normal[e].dot(mesh.outward_normal(t, k));
      map.edge_signs[t][k] = (s > 0.0) ? 1 : -1;
      for (int m = 0; m < per_edge; ++m)
        map.tri_dofs[t * map.dofs_per_tri + k * per_edge + m] = map.entity_dofs[e * per_edge + m];
    }
  }

  map.boundary_dof.assign(constrain_boundary ? map.n_global : ne * per_edge, false);
  if (!constrain_boundary) {
    for (int e = 0; e < ne; ++e)
      if (mesh.boundary_edge[e])
        for (int m = 0; m < per_edge; ++m) map.boundary_dof[e * per_edge + m] = true;
  }
  return map;
}

std::vector<ElementBasis> build_element_bases(const Mesh& mesh, SpaceKind kind) {
  if (kind == SpaceKind::P0) throw std::invalid_argument("build_element_bases: vector spaces only");

  const int nt = mesh.n_triangles();
  std::vector<ElementBasis> bases(nt);

  for (int t = 0; t < nt; ++t) {
    ElementBasis& eb = bases[t];
    auto coords = mesh.triangle_coords(t);
    const double area = mesh.tri_area[t];

    if (kind == SpaceKind::RT0) {
      eb.n = 3;
      for (int k = 0; k < 3; ++k) {
        int e = mesh.tri_edges[t][k];
        double s = mesh.edge_normal[e].dot(mesh.outward_normal(t, k)) > 0.0 ? 1.0 : -1.0;
        // s * |e|/(2A) (x - P_k): unit normal component against the global
        // edge normal on edge k, zero on the others.
        double c = s * mesh.edge_length[e] / (2.0 * area);
        Eigen::Vector2d pk = coords.col(k);
        eb.vec_const[k] = -c * pk;
        eb.vec_lin[k] = c * Eigen::Matrix2d::Identity();
        eb.div[k] = 2.0 * c;
      }
    } else {
      eb.n = 6;
      // u = (a0 + a1 x + a2 y, a3 + a4 x + a5 y); rows are the endpoint
      // values of u.n_e per local edge, in global endpoint order.
      Eigen::Matrix<double, 6, 6> F;
      for (int k = 0; k < 3; ++k) {
        int e = mesh.tri_edges[t][k];
        Eigen::Vector2d n = mesh.edge_normal[e];
        for (int m = 0; m < 2; ++m) {
          Eigen::Vector2d xv = mesh.vertices[mesh.edges[e][m]];
          F.row(2 * k + m) << n.x(), n.x() * xv.x(), n.x() * xv.y(), n.y(), n.y() * xv.x(), n.y() * xv.y();
        }
      }
      Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(F);
      if (!lu.isInvertible()) throw std::logic_error("build_element_bases: degenerate BDM1 element");
      Eigen::Matrix<double, 6, 6> C = lu.inverse();
      for (int l = 0; l < 6; ++l) {
        Eigen::Matrix<double, 6, 1> a = C.col(l);
        eb.vec_const[l] = Eigen::Vector2d(a[0], a[3]);
        eb.vec_lin[l] << a[1], a[2], a[4], a[5];
        eb.div[l] = a[1] + a[5];
      }
    }
  }
  return bases;
}

const TriQuadrature& triangle_rule(int degree) {
  static const TriQuadrature deg2 = [] {
    TriQuadrature q;
    const double a = 2.0 / 3.0, b = 1.0 / 6.0;
    q.bary = {{a, b, b}, {b, a, b}, {b, b, a}};
    q.weight = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return q;
  }();
  static const TriQuadrature deg4 = [] {
    TriQuadrature q;
    const double w1 = 0.223381589678011, a1 = 0.445948490915965;
    const double w2 = 0.109951743655322, a2 = 0.091576213509771;
    for (auto [w, a] : {std::pair{w1, a1}, std::pair{w2, a2}}) {
      double c = 1.0 - 2.0 * a;
      q.bary.push_back({a, a, c});
      q.bary.push_back({a, c, a});
      q.bary.push_back({c, a, a});
      q.weight.insert(q.weight.end(), 3, w);
    }
    return q;
  }();
  if (degree <= 2) return deg2;
  if (degree <= 4) return deg4;
  throw std::invalid_argument("triangle_rule: degree > 4 not provided");
}

const EdgeQuadrature& edge_rule(int npts) {
  static const EdgeQuadrature g2 = [] {
    EdgeQuadrature q;
    const double d = 0.5 / std::sqrt(3.0);
    q.point = {0.5 - d, 0.5 + d};
    q.weight = {0.5, 0.5};
    return q;
  }();
  static const EdgeQuadrature g3 = [] {
    EdgeQuadrature q;
    const double d = 0.5 * std::sqrt(3.0 / 5.0);
    q.point = {0.5 - d, 0.5, 0.5 + d};
    q.weight = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
    return q;
  }();
  if (npts <= 2) return g2;
  return g3;
}

SpMat assemble_mass(const Mesh& mesh, const DofMap& row, const DofMap& col) {
  check_same_mesh(mesh, row, "assemble_mass");
  check_same_mesh(mesh, col, "assemble_mass");

  std::vector<Eigen::Triplet<double>> trips;

  if (row.kind == SpaceKind::P0 && col.kind == SpaceKind::P0) {
    for (int t = 0; t < mesh.n_triangles(); ++t) trips.emplace_back(t, t, mesh.tri_area[t]);
  } else if (row.kind != SpaceKind::P0 && col.kind != SpaceKind::P0) {
    auto row_bases = build_element_bases(mesh, row.kind);
    auto col_bases = (row.kind == col.kind) ? row_bases : build_element_bases(mesh, col.kind);
    const auto& quad = triangle_rule(4);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      auto coords = mesh.triangle_coords(t);
      const auto& rb = row_bases[t];
      const auto& cb = col_bases[t];
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(rb.n, cb.n);
      for (size_t q = 0; q < quad.bary.size(); ++q) {
        Eigen::Vector2d x = bary_to_physical(coords, quad.bary[q]);
        double w = quad.weight[q] * mesh.tri_area[t];
        for (int i = 0; i < rb.n; ++i) {
          Eigen::Vector2d vi = rb.value(i, x);
          for (int j = 0; j < cb.n; ++j) local(i, j) += w * vi.dot(cb.value(j, x));
        }
      }
      for (int i = 0; i < rb.n; ++i) {
        int gi = row(t, i);
        if (gi < 0) continue;
        for (int j = 0; j < cb.n; ++j) {
          int gj = col(t, j);
          if (gj < 0) continue;
          trips.emplace_back(gi, gj, local(i, j));
        }
      }
    }
  } else {
    throw std::invalid_argument("assemble_mass: scalar/vector pairing not defined");
  }

  SpMat M(row.n_global, col.n_global);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

SpMat assemble_div(const Mesh& mesh, const DofMap& vec, const DofMap& p0) {
  check_same_mesh(mesh, vec, "assemble_div");
  check_same_mesh(mesh, p0, "assemble_div");
  if (vec.kind == SpaceKind::P0 || p0.kind != SpaceKind::P0)
    throw std::invalid_argument("assemble_div: expects (vector, P0) maps");

  auto bases = build_element_bases(mesh, vec.kind);
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    int gp = p0(t, 0);
    const auto& eb = bases[t];
    for (int l = 0; l < eb.n; ++l) {
      int gj = vec(t, l);
      if (gj < 0) continue;
      trips.emplace_back(gp, gj, eb.div[l] * mesh.tri_area[t]);
    }
  }
  SpMat D(p0.n_global, vec.n_global);
  D.setFromTriplets(trips.begin(), trips.end());
  return D;
}

SpMat assemble_div_div(const Mesh& mesh, const DofMap& vec) {
  check_same_mesh(mesh, vec, "assemble_div_div");
  auto bases = build_element_bases(mesh, vec.kind);
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& eb = bases[t];
    for (int i = 0; i < eb.n; ++i) {
      int gi = vec(t, i);
      if (gi < 0) continue;
      for (int j = 0; j < eb.n; ++j) {
        int gj = vec(t, j);
        if (gj < 0) continue;
        trips.emplace_back(gi, gj, eb.div[i] * eb.div[j] * mesh.tri_area[t]);
      }
    }
  }
  SpMat K(vec.n_global, vec.n_global);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

namespace {

/// Trace bookkeeping of all BDM1 basis functions adjacent to one edge.
/// jump[q] carries the side sign; avg carries the 1/2 (interior) or the
/// outward-normal choice (boundary).
struct EdgeTraces {
  std::vector<int> gdof;
  std::vector<std::vector<Eigen::Vector2d>> jump;  // [entry][quad point], tangential
  std::vector<Eigen::Vector2d> avg_strain_n;       // constant per entry
};

EdgeTraces gather_edge_traces(const Mesh& mesh, const DofMap& map,
                              const std::vector<ElementBasis>& bases, int e,
                              const EdgeQuadrature& rule) {
  EdgeTraces tr;
  const bool bnd = mesh.boundary_edge[e];
  Eigen::Vector2d n = mesh.edge_normal[e];
  Eigen::Vector2d n_eff = bnd ? Eigen::Vector2d(mesh.boundary_outward_sign[e] * n) : n;
  Eigen::Matrix2d Pt = Eigen::Matrix2d::Identity() - n * n.transpose();
  Eigen::Vector2d a = mesh.vertices[mesh.edges[e][0]];
  Eigen::Vector2d b = mesh.vertices[mesh.edges[e][1]];

  for (int side = 0; side < 2; ++side) {
    int t = mesh.edge_tris[e][side];
    if (t < 0) continue;
    double zeta = (side == 0) ? 1.0 : -1.0;
    double fac = bnd ? 1.0 : 0.5;
    const auto& eb = bases[t];
    for (int l = 0; l < eb.n; ++l) {
      tr.gdof.push_back(map(t, l));
      std::vector<Eigen::Vector2d> jq(rule.point.size());
      for (size_t q = 0; q < rule.point.size(); ++q) {
        Eigen::Vector2d x = a + rule.point[q] * (b - a);
        jq[q] = zeta * (Pt * eb.value(l, x));
      }
      tr.jump.push_back(std::move(jq));
      tr.avg_strain_n.push_back(fac * (eb.strain(l) * n_eff));
    }
  }
  return tr;
}

SpMat assemble_edge_volume_form(const Mesh& mesh, const DofMap& bdm1, bool use_strain,
                                bool consistency_terms, double penalty) {
  check_same_mesh(mesh, bdm1, "assemble_dg");
  if (bdm1.kind != SpaceKind::BDM1) throw std::invalid_argument("DG form expects a BDM1 map");

  auto bases = build_element_bases(mesh, SpaceKind::BDM1);
  const auto& erule = edge_rule(2);

  std::vector<Eigen::Triplet<double>> trips;

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& eb = bases[t];
    for (int i = 0; i < eb.n; ++i) {
      int gi = bdm1(t, i);
      if (gi < 0) continue;
      Eigen::Matrix2d gi_mat = use_strain ? eb.strain(i) : eb.grad(i);
      for (int j = 0; j < eb.n; ++j) {
        int gj = bdm1(t, j);
        if (gj < 0) continue;
        Eigen::Matrix2d gj_mat = use_strain ? eb.strain(j) : eb.grad(j);
        trips.emplace_back(gi, gj, mesh.tri_area[t] * gi_mat.cwiseProduct(gj_mat).sum());
      }
    }
  }

  for (int e = 0; e < mesh.n_edges(); ++e) {
    EdgeTraces tr = gather_edge_traces(mesh, bdm1, bases, e, erule);
    const double len = mesh.edge_length[e];
    const double pen = penalty / mesh.edge_length[e];
    const int m = static_cast<int>(tr.gdof.size());
    for (int i = 0; i < m; ++i) {
      if (tr.gdof[i] < 0) continue;
      for (int j = 0; j < m; ++j) {
        if (tr.gdof[j] < 0) continue;
        double val = 0.0;
        for (size_t q = 0; q < erule.point.size(); ++q) {
          double w = erule.weight[q] * len;
          double contrib = pen * tr.jump[i][q].dot(tr.jump[j][q]);
          if (consistency_terms)
            contrib -= tr.avg_strain_n[j].dot(tr.jump[i][q]) + tr.avg_strain_n[i].dot(tr.jump[j][q]);
          val += w * contrib;
        }
        trips.emplace_back(tr.gdof[i], tr.gdof[j], val);
      }
    }
  }

  SpMat A(bdm1.n_global, bdm1.n_global);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

}  // namespace

SpMat assemble_dg_elasticity(const Mesh& mesh, const DofMap& bdm1, const DgConfig& config) {
  if (config.eta <= 0.0) throw std::invalid_argument("assemble_dg_elasticity: eta must be > 0");
  return assemble_edge_volume_form(mesh, bdm1, /*use_strain=*/true,
                                   /*consistency_terms=*/true, config.eta);
}

SpMat assemble_norm_gram(const Mesh& mesh, const DofMap& bdm1, char kind) {
  if (kind != 'h' && kind != '1') throw std::invalid_argument("assemble_norm_gram: kind is 'h' or '1'");
  return assemble_edge_volume_form(mesh, bdm1, /*use_strain=*/kind == 'h',
                                   /*consistency_terms=*/false, 1.0);
}

DgNorms dg_norms(const Mesh& mesh, const DofMap& bdm1, const Eigen::VectorXd& coefficients) {
  if (coefficients.size() != bdm1.n_global)
    throw std::invalid_argument("dg_norms: coefficient vector size mismatch");
  SpMat gh = assemble_norm_gram(mesh, bdm1, 'h');
  SpMat g1 = assemble_norm_gram(mesh, bdm1, '1');
  DgNorms out;
  out.h = std::sqrt(std::max(0.0, coefficients.dot(gh * coefficients)));
  out.one_h = std::sqrt(std::max(0.0, coefficients.dot(g1 * coefficients)));
  out.dg = out.one_h;  // h_T^2 |u|_{2,T}^2 vanishes for componentwise linears
  return out;
}

Eigen::VectorXd interpolate(const Mesh& mesh, const DofMap& map, const VectorField& field) {
  if (map.kind == SpaceKind::P0) throw std::invalid_argument("interpolate: scalar map needs a scalar field");
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(map.n_global);

  if (map.kind == SpaceKind::BDM1) {
    for (int e = 0; e < mesh.n_edges(); ++e) {
      Eigen::Vector2d n = mesh.edge_normal[e];
      for (int m = 0; m < 2; ++m) {
        int g = map.entity_dofs[2 * e + m];
        if (g < 0) continue;
        coeffs[g] = field(mesh.vertices[mesh.edges[e][m]]).dot(n);
      }
    }
  } else {
    const auto& rule = edge_rule(3);
    for (int e = 0; e < mesh.n_edges(); ++e) {
      int g = map.entity_dofs[e];
      if (g < 0) continue;
      Eigen::Vector2d a = mesh.vertices[mesh.edges[e][0]];
      Eigen::Vector2d b = mesh.vertices[mesh.edges[e][1]];
      double mom = 0.0;
      for (size_t q = 0; q < rule.point.size(); ++q)
        mom += rule.weight[q] * field(a + rule.point[q] * (b - a)).dot(mesh.edge_normal[e]);
      coeffs[g] = mom;  // average of u.n over the edge
    }
  }
  return coeffs;
}

Eigen::VectorXd interpolate(const Mesh& mesh, const DofMap& map, const ScalarField& field) {
  if (map.kind != SpaceKind::P0) throw std::invalid_argument("interpolate: vector map needs a vector field");
  const auto& quad = triangle_rule(4);
  Eigen::VectorXd coeffs(map.n_global);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    auto coords = mesh.triangle_coords(t);
    double avg = 0.0;
    for (size_t q = 0; q < quad.bary.size(); ++q)
      avg += quad.weight[q] * field(bary_to_physical(coords, quad.bary[q]));
    coeffs[map(t, 0)] = avg;
  }
  return coeffs;
}

Eigen::VectorXd assemble_load_moments(const Mesh& mesh, const DofMap& map, const VectorField& field,
                                      int quad_degree) {
  check_same_mesh(mesh, map, "assemble_load_moments");
  auto bases = build_element_bases(mesh, map.kind);
  const auto& quad = triangle_rule(quad_degree);
  Eigen::VectorXd mom = Eigen::VectorXd::Zero(map.n_global);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    auto coords = mesh.triangle_coords(t);
    const auto& eb = bases[t];
    for (size_t q = 0; q < quad.bary.size(); ++q) {
      Eigen::Vector2d x = bary_to_physical(coords, quad.bary[q]);
      Eigen::Vector2d fx = field(x);
      double w = quad.weight[q] * mesh.tri_area[t];
      for (int l = 0; l < eb.n; ++l) {
        int g = map(t, l);
        if (g < 0) continue;
        mom[g] += w * fx.dot(eb.value(l, x));
      }
    }
  }
  return mom;
}

}  // namespace mpet
