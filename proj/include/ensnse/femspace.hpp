#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "ensnse/mesh.hpp"

namespace ensnse {

// Space-time fields (x, y, t). Tensor fields return the 2x2 gradient with
// rows indexed by velocity component: G(r,c) = d u_r / d x_c.
using ScalarField = std::function<double(double, double, double)>;
using VectorField = std::function<Vec2(double, double, double)>;
using TensorField = std::function<Eigen::Matrix2d(double, double, double)>;

// Symmetric rule on the reference triangle {l0,l1,l2 >= 0, sum = 1}.
// Weights include the reference area, so they sum to 1/2, and the rule
// integrates polynomials up to (at least) the requested degree exactly.
struct QuadratureRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;  // barycentric
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

// Supported exactness degrees: 1, 2, 3, 5, 7. Anything else throws.
// Degree 5 is the assembly default, degree 7 the error-norm default.
QuadratureRule quadrature(int degree);

// Scalar P2 basis on the reference triangle: values and barycentric data for
// the 6 local nodes (3 vertex nodes, then midpoints opposite vertex 0,1,2).
std::array<double, 6> p2_values(double l0, double l1, double l2);
std::array<double, 3> p1_values(double l0, double l1, double l2);

enum class Layout { VelocityVector, Pressure };

// Coefficient vector with its interpretation. Velocity vectors are two
// stacked scalar-component blocks of length n_scalar (x block then y block);
// pressure vectors are vertex-indexed P1 coefficients.
struct CoefficientVector {
  Layout layout = Layout::VelocityVector;
  Eigen::VectorXd values;
};

// Taylor-Hood pair on a triangulation: continuous P2 velocity components,
// continuous P1 pressure. Scalar P2 node k is vertex k for k < n_vertices,
// else the midpoint of edge k - n_vertices.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(Mesh mesh);

  const Mesh& mesh() const { return mesh_; }
  int n_scalar() const { return n_scalar_; }          // P2 nodes per component
  int n_velocity() const { return 2 * n_scalar_; }    // stacked components
  int n_pressure() const { return mesh_.n_vertices(); }

  // Global scalar P2 indices of triangle t, local order: v0 v1 v2 m0 m1 m2.
  const std::array<int, 6>& cell_p2(int t) const { return cell_p2_[t]; }
  const std::array<int, 3>& cell_p1(int t) const { return mesh_.triangles[t]; }

  Vec2 node_position(int k) const { return node_pos_[k]; }

  // Sorted scalar P2 node indices on the boundary. The constrained velocity
  // dofs are these indices in both component blocks.
  const std::vector<int>& dirichlet_nodes() const { return dirichlet_nodes_; }
  bool node_on_boundary(int k) const { return node_boundary_[k] != 0; }

  int velocity_dof(int component, int scalar_node) const {
    return component * n_scalar_ + scalar_node;
  }

  // Per-cell geometry used all over assembly: barycentric gradients (constant
  // on the cell) and the cell area.
  struct CellGeometry {
    std::array<Eigen::Vector2d, 3> grad_lambda;
    double area;
  };
  CellGeometry cell_geometry(int t) const;

 private:
  Mesh mesh_;
  int n_scalar_ = 0;
  std::vector<std::array<int, 6>> cell_p2_;
  std::vector<Vec2> node_pos_;
  std::vector<char> node_boundary_;
  std::vector<int> dirichlet_nodes_;
};

TaylorHoodSpace build_space(Mesh mesh);

// P2 gradients at a quadrature point of a given cell, from the chain rule on
// the barycentric gradients. Row i is grad(phi_i).
std::array<Eigen::Vector2d, 6> p2_gradients(const TaylorHoodSpace::CellGeometry& geo,
                                            double l0, double l1, double l2);

// Nodal interpolation. Velocity: both components evaluated at every P2 node.
// Pressure: vertex values.
CoefficientVector interpolate_velocity(const TaylorHoodSpace& space, const VectorField& f,
                                       double t);
CoefficientVector interpolate_pressure(const TaylorHoodSpace& space, const ScalarField& f,
                                       double t);

// Evaluation of a velocity coefficient vector at a barycentric point of a
// cell; used by error norms and the nonlinear terms.
Vec2 velocity_at(const TaylorHoodSpace& space, const Eigen::VectorXd& u, int t, double l0,
                 double l1, double l2);

}  // namespace ensnse
