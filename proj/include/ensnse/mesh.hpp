#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace ensnse {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Conforming triangulation of the closed unit square [0,1]^2.
//
// Triangles are counterclockwise vertex-index triples. Edges are unordered
// vertex pairs stored as (lo, hi); triangle_edges[t][i] is the edge opposite
// local vertex i, which is also the owner of the P2 midpoint node sitting on
// that edge. An edge is a boundary edge iff exactly one triangle touches it.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> triangle_edges;
  std::vector<char> vertex_on_boundary;
  std::vector<char> edge_on_boundary;
  double h = 0.0;  // longest edge over all triangles

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
};

// Uniform n x n grid of squares, each split into two triangles along the
// (i,j)-(i+1,j+1) diagonal. (n+1)^2 vertices, 2n^2 triangles, h = sqrt(2)/n.
Mesh unit_square_mesh(int n);

// One sweep of uniform red refinement: every triangle splits into four
// similar children through its edge midpoints. Quadruples triangle count.
Mesh refine(const Mesh& mesh);

// Structural checks used by tests and by the two builders above: CCW
// orientation, edge/triangle consistency, boundary flags matching
// coordinates, positive areas, Euler characteristic of a disk.
void validate(const Mesh& mesh);

// Plain-text dump: "vertices" block (index x y boundary_flag), "triangles"
// block (index v0 v1 v2), "edges" block (index v0 v1 boundary_flag).
void write_mesh(const Mesh& mesh, std::ostream& out);

double triangle_area(const Mesh& mesh, int t);

}  // namespace ensnse
