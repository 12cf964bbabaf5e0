#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace mpet {

/// Conforming triangulation of the unit square with the edge/normal/jump
/// bookkeeping needed by H(div) elements and interior-penalty DG forms.
///
/// Conventions (fixed, deterministic):
///  - triangles are stored counter-clockwise;
///  - edges are stored low-vertex-index -> high-vertex-index, and the unit
///    normal is the edge tangent rotated by -90 degrees;
///  - edge_tris[e][0] is the triangle the stored normal points out of
///    ("side 1" of jump/average definitions), edge_tris[e][1] the other
///    (-1 on the boundary).
struct Mesh {
  int nx = 0;
  int ny = 0;

  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 2>> edge_tris;
  /// Edge ids per triangle; local edge k is opposite local vertex k.
  std::vector<std::array<int, 3>> tri_edges;
  std::vector<bool> boundary_edge;
  /// +1 if the stored edge normal is outward for the boundary edge's
  /// single triangle, -1 otherwise. Unused (0) for interior edges.
  std::vector<signed char> boundary_outward_sign;

  std::vector<double> edge_length;    // h_e
  std::vector<double> tri_diameter;   // h_T
  std::vector<double> tri_area;
  std::vector<Eigen::Vector2d> edge_normal;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_boundary_edges() const;

  double max_diameter() const;

  /// Vertex coordinates of triangle t as columns.
  Eigen::Matrix<double, 2, 3> triangle_coords(int t) const;
  Eigen::Vector2d centroid(int t) const;
  /// Outward unit normal of triangle t on its local edge k.
  Eigen::Vector2d outward_normal(int t, int k) const;
};

/// Triangulates the unit square into 2*nx*ny right triangles (each cell is
/// split along its lower-left/upper-right diagonal). Throws
/// std::invalid_argument for nx < 1 or ny < 1.
Mesh build_structured_mesh(int nx, int ny);

struct EdgeTrace {
  std::array<int, 2> tris;   // [side-1 triangle, side-2 triangle or -1]
  Eigen::Vector2d normal;    // side-1 outward for interior, domain outward for boundary
  double h_e = 0.0;
  bool boundary = false;
};

/// Adjacency, normal and length data for one edge, ordered consistently
/// with the stored normal. Throws std::out_of_range for invalid indices.
EdgeTrace edge_trace_data(const Mesh& mesh, int edge);

/// Plain-text dump: one vertex per line, then one triangle per line.
void dump_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace mpet
