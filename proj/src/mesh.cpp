#include "ensnse/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>

namespace ensnse {

namespace {

constexpr double kBoundaryTol = 1e-12;

bool on_unit_square_boundary(const Vec2& p) {
  return std::abs(p.x) < kBoundaryTol || std::abs(p.x - 1.0) < kBoundaryTol ||
         std::abs(p.y) < kBoundaryTol || std::abs(p.y - 1.0) < kBoundaryTol;
}

double dist(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Builds the edge list, the per-triangle edge map (edge i opposite local
// vertex i), the boundary flags and h. Edge order is deterministic: first
// appearance while sweeping triangles in order, local edges in order
// (1,2), (0,2), (0,1).
void finalize(Mesh& mesh) {
  std::map<std::pair<int, int>, int> edge_index;
  std::vector<int> touch_count;
  mesh.edges.clear();
  mesh.triangle_edges.assign(mesh.triangles.size(), {-1, -1, -1});

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[(i + 1) % 3];
      int b = tri[(i + 2) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_index.find(key);
      int e;
      if (it == edge_index.end()) {
        e = static_cast<int>(mesh.edges.size());
        edge_index.emplace(key, e);
        mesh.edges.push_back({key.first, key.second});
        touch_count.push_back(0);
      } else {
        e = it->second;
      }
      mesh.triangle_edges[t][i] = e;
      ++touch_count[e];
    }
  }

  mesh.vertex_on_boundary.assign(mesh.vertices.size(), 0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    mesh.vertex_on_boundary[v] = on_unit_square_boundary(mesh.vertices[v]) ? 1 : 0;

  mesh.edge_on_boundary.assign(mesh.edges.size(), 0);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    mesh.edge_on_boundary[e] = (touch_count[e] == 1) ? 1 : 0;

  mesh.h = 0.0;
  for (const auto& ed : mesh.edges)
    mesh.h = std::max(mesh.h, dist(mesh.vertices[ed[0]], mesh.vertices[ed[1]]));
}

}  // namespace

double triangle_area(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2& p0 = mesh.vertices[tri[0]];
  const Vec2& p1 = mesh.vertices[tri[1]];
  const Vec2& p2 = mesh.vertices[tri[2]];
  return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

Mesh unit_square_mesh(int n) {
  if (n < 1) throw std::invalid_argument("unit_square_mesh: n must be >= 1");

  Mesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // Both triangles share the same diagonal direction, CCW.
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }

  finalize(mesh);
  validate(mesh);
  return mesh;
}

Mesh refine(const Mesh& parent) {
  Mesh mesh;
  mesh.vertices = parent.vertices;

  // One new vertex per parent edge, appended after the old vertices.
  std::vector<int> midpoint(parent.edges.size());
  for (std::size_t e = 0; e < parent.edges.size(); ++e) {
    const Vec2& a = parent.vertices[parent.edges[e][0]];
    const Vec2& b = parent.vertices[parent.edges[e][1]];
    midpoint[e] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
  }

  mesh.triangles.reserve(4 * parent.triangles.size());
  for (std::size_t t = 0; t < parent.triangles.size(); ++t) {
    const auto& tri = parent.triangles[t];
    // m[i] is the midpoint opposite local vertex i.
    int m0 = midpoint[parent.triangle_edges[t][0]];
    int m1 = midpoint[parent.triangle_edges[t][1]];
    int m2 = midpoint[parent.triangle_edges[t][2]];
    mesh.triangles.push_back({tri[0], m2, m1});
    mesh.triangles.push_back({tri[1], m0, m2});
    mesh.triangles.push_back({tri[2], m1, m0});
    mesh.triangles.push_back({m0, m1, m2});
  }

  finalize(mesh);
  validate(mesh);
  return mesh;
}

void validate(const Mesh& mesh) {
  if (mesh.vertices.empty() || mesh.triangles.empty())
    throw std::runtime_error("mesh: empty");

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= mesh.n_vertices())
        throw std::runtime_error("mesh: triangle vertex index out of range");
    if (triangle_area(mesh, static_cast<int>(t)) <= 0.0)
      throw std::runtime_error("mesh: triangle not counterclockwise or degenerate");
  }

  // Disk topology: V - E + T = 1.
  if (mesh.n_vertices() - mesh.n_edges() + mesh.n_triangles() != 1)
    throw std::runtime_error("mesh: Euler characteristic violated");

  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (mesh.edge_on_boundary[e]) {
      if (!mesh.vertex_on_boundary[mesh.edges[e][0]] ||
          !mesh.vertex_on_boundary[mesh.edges[e][1]])
        throw std::runtime_error("mesh: boundary edge with interior endpoint");
      // Midpoint of a boundary edge must itself lie on the boundary.
      const Vec2& a = mesh.vertices[mesh.edges[e][0]];
      const Vec2& b = mesh.vertices[mesh.edges[e][1]];
      if (!on_unit_square_boundary({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}))
        throw std::runtime_error("mesh: boundary edge midpoint off the boundary");
    }
  }
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << std::setprecision(17);
  out << "vertices " << mesh.n_vertices() << "\n";
  for (int v = 0; v < mesh.n_vertices(); ++v)
    out << v << " " << mesh.vertices[v].x << " " << mesh.vertices[v].y << " "
        << static_cast<int>(mesh.vertex_on_boundary[v]) << "\n";
  out << "triangles " << mesh.n_triangles() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t)
    out << t << " " << mesh.triangles[t][0] << " " << mesh.triangles[t][1] << " "
        << mesh.triangles[t][2] << "\n";
  out << "edges " << mesh.n_edges() << "\n";
  for (int e = 0; e < mesh.n_edges(); ++e)
    out << e << " " << mesh.edges[e][0] << " " << mesh.edges[e][1] << " "
        << static_cast<int>(mesh.edge_on_boundary[e]) << "\n";
}

}  // namespace ensnse
