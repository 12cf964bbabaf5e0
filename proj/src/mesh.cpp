#include "mpet/mesh.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

namespace mpet {

int Mesh::n_boundary_edges() const {
  return static_cast<int>(std::count(boundary_edge.begin(), boundary_edge.end(), true));
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (double d : tri_diameter) h = std::max(h, d);
  return h;
}

Eigen::Matrix<double, 2, 3> Mesh::triangle_coords(int t) const {
  Eigen::Matrix<double, 2, 3> c;
  for (int k = 0; k < 3; ++k) c.col(k) = vertices[triangles[t][k]];
  return c;
}

Eigen::Vector2d Mesh::centroid(int t) const {
  return triangle_coords(t).rowwise().mean();
}

Eigen::Vector2d Mesh::outward_normal(int t, int k) const {
  // Local edge k runs from vertex k+1 to vertex k+2 (mod 3); with CCW
  // triangles the -90 degree rotation of that tangent points outward.
  const auto& tri = triangles[t];
  Eigen::Vector2d a = vertices[tri[(k + 1) % 3]];
  Eigen::Vector2d b = vertices[tri[(k + 2) % 3]];
  Eigen::Vector2d tang = (b - a).normalized();
  return Eigen::Vector2d(tang.y(), -tang.x());
}

Mesh build_structured_mesh(int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_structured_mesh: nx and ny must be >= 1");

  Mesh m;
  m.nx = nx;
  m.ny = ny;

  m.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.emplace_back(static_cast<double>(i) / nx, static_cast<double>(j) / ny);

  auto vid = [nx](int i, int j) { return i + j * (nx + 1); };

  m.triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
  }

  // Unique edges keyed by (lo, hi) vertex pair.
  std::map<std::pair<int, int>, int> edge_id;
  m.tri_edges.resize(m.triangles.size());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_id.find(key);
      int e;
      if (it == edge_id.end()) {
        e = m.n_edges();
        edge_id.emplace(key, e);
        m.edges.push_back({key.first, key.second});
        m.edge_tris.push_back({-1, -1});
      } else {
        e = it->second;
      }
      m.tri_edges[t][k] = e;
    }
  }

  m.edge_length.resize(m.n_edges());
  m.edge_normal.resize(m.n_edges());
  for (int e = 0; e < m.n_edges(); ++e) {
    Eigen::Vector2d a = m.vertices[m.edges[e][0]];
    Eigen::Vector2d b = m.vertices[m.edges[e][1]];
    m.edge_length[e] = (b - a).norm();
    Eigen::Vector2d tang = (b - a) / m.edge_length[e];
    m.edge_normal[e] = Eigen::Vector2d(tang.y(), -tang.x());
  }

  // Adjacency with side-1 = triangle the stored normal points out of.
  for (int t = 0; t < m.n_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int e = m.tri_edges[t][k];
      Eigen::Vector2d mid = 0.5 * (m.vertices[m.edges[e][0]] + m.vertices[m.edges[e][1]]);
      double side = m.edge_normal[e].dot(m.centroid(t) - mid);
      if (side < 0.0) {
        m.edge_tris[e][0] = t;
      } else {
        m.edge_tris[e][1] = t;
      }
    }
  }

  m.boundary_edge.resize(m.n_edges());
  m.boundary_outward_sign.assign(m.n_edges(), 0);
  for (int e = 0; e < m.n_edges(); ++e) {
    bool has0 = m.edge_tris[e][0] >= 0, has1 = m.edge_tris[e][1] >= 0;
    m.boundary_edge[e] = !(has0 && has1);
    if (m.boundary_edge[e]) {
      if (!has0) std::swap(m.edge_tris[e][0], m.edge_tris[e][1]);
      // After the swap the single triangle sits in slot 0; the stored
      // normal is outward for it iff it was on the inward side.
      m.boundary_outward_sign[e] = has0 ? 1 : -1;
    }
  }

  m.tri_area.resize(m.n_triangles());
  m.tri_diameter.resize(m.n_triangles());
  for (int t = 0; t < m.n_triangles(); ++t) {
    auto c = m.triangle_coords(t);
    Eigen::Vector2d e1 = c.col(1) - c.col(0), e2 = c.col(2) - c.col(0);
    double signed_area = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    if (signed_area <= 0.0) throw std::logic_error("build_structured_mesh: non-CCW triangle");
    m.tri_area[t] = signed_area;
    double d = 0.0;
    for (int k = 0; k < 3; ++k) d = std::max(d, m.edge_length[m.tri_edges[t][k]]);
    m.tri_diameter[t] = d;
  }

  return m;
}

EdgeTrace edge_trace_data(const Mesh& mesh, int edge) {
  if (edge < 0 || edge >= mesh.n_edges()) throw std::out_of_range("edge_trace_data: invalid edge index");
  EdgeTrace tr;
  tr.tris = mesh.edge_tris[edge];
  tr.h_e = mesh.edge_length[edge];
  tr.boundary = mesh.boundary_edge[edge];
  tr.normal = mesh.edge_normal[edge];
  if (tr.boundary) tr.normal *= static_cast<double>(mesh.boundary_outward_sign[edge]);
  return tr;
}

void dump_mesh(const Mesh& mesh, std::ostream& out) {
  out << "vertices " << mesh.n_vertices() << "\n";
  for (int v = 0; v < mesh.n_vertices(); ++v)
    out << v << " " << mesh.vertices[v].x() << " " << mesh.vertices[v].y() << "\n";
  out << "triangles " << mesh.n_triangles() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t)
    out << t << " " << mesh.triangles[t][0] << " " << mesh.triangles[t][1] << " " << mesh.triangles[t][2] << "\n";
}

}  // namespace mpet
