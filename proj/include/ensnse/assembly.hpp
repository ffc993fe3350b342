#pragma once

#include <Eigen/Sparse>
#include <map>
#include <vector>

#include "ensnse/femspace.hpp"

namespace ensnse {

using SpMat = Eigen::SparseMatrix<double>;

// Velocity-block operators on the stacked two-component layout. Sizes are
// n_velocity x n_velocity unless noted. No viscosity or timestep scaling is
// baked in; callers combine blocks themselves.
SpMat assemble_mass(const TaylorHoodSpace& space, int quad_degree = 5);
SpMat assemble_stiffness(const TaylorHoodSpace& space, int quad_degree = 5);
// B is n_pressure x n_velocity with B(i,k) = (psi_i, d phi_k / d x_c) for
// dof k in component block c, so (B u)_i = (psi_i, div u_h).
SpMat assemble_divergence(const TaylorHoodSpace& space, int quad_degree = 5);
// G(i,k) = (div basis_i, div basis_k); u^T G u = ||div u_h||^2.
SpMat assemble_graddiv(const TaylorHoodSpace& space, int quad_degree = 5);

// Skew form b*(u,v,w) = 1/2 (u.grad v, w) - 1/2 (u.grad w, v).
// assemble_convection returns N(w) with (N(w) v, z) = b*(w_h, v_h, z_h);
// the matrix is exactly antisymmetric and block diagonal per component.
// Rejects w with a non-velocity layout or wrong length.
SpMat assemble_convection(const TaylorHoodSpace& space, const CoefficientVector& w,
                          int quad_degree = 5);

// r with r_i = b*(a_h, b_h, basis_i): the convection term applied as an
// operator action, used for the per-member fluctuation term so the shared
// matrix never sees member-dependent data.
Eigen::VectorXd convection_apply(const TaylorHoodSpace& space, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& b, int quad_degree = 5);

// b*(a,b,c) as a scalar; test convenience.
double trilinear_form(const TaylorHoodSpace& space, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                      int quad_degree = 5);

// Load vector l_i = (f(.,t), basis_i).
Eigen::VectorXd assemble_load(const TaylorHoodSpace& space, const VectorField& f, double t,
                              int quad_degree = 5);

// m_i = integral of psi_i; the zero-mean pressure multiplier row.
Eigen::VectorXd pressure_mean_row(const TaylorHoodSpace& space, int quad_degree = 5);

// Saddle system
//   [ F   B^T  0  ] [u     ]   [r_u]
//   [ B   0    m^T] [p_hat ] = [0  ]
//   [ 0   m    0  ] [lambda]   [0  ]
// in one sparse matrix of size n_velocity + n_pressure + 1. The momentum
// equation uses -(p, div v), so p_hat = -p and callers negate the pressure
// block after solving. Dirichlet constraints replace each constrained row
// with an identity row and move its column to the right-hand side through
// the lift matrix; the constrained matrix therefore depends only on WHICH
// dofs are constrained, never on the boundary values, and is shared across
// ensemble members.
struct SaddleSystem {
  int n_velocity = 0;
  int n_pressure = 0;
  std::vector<int> constrained;  // sorted velocity dof indices
  SpMat matrix;                  // constrained system, ready to factor
  SpMat lift;                    // raw columns at constrained dofs, constrained rows zeroed

  int size() const { return n_velocity + n_pressure + 1; }
};

SaddleSystem build_saddle(const TaylorHoodSpace& space, const SpMat& velocity_block,
                          const SpMat& divergence, const Eigen::VectorXd& mean_row,
                          const std::vector<int>& constrained_velocity_dofs);

// Right-hand side for one member: raw (unconstrained) rhs plus the boundary
// values at the constrained dofs, in the order of system.constrained.
// Performs the lift and pins the constrained entries.
Eigen::VectorXd constrained_rhs(const SaddleSystem& system, const Eigen::VectorXd& raw_rhs,
                                const Eigen::VectorXd& boundary_values);

// Spec-shaped convenience: values keyed by velocity dof index. Throws if the
// map does not cover the constrained set exactly.
Eigen::VectorXd constrained_rhs(const SaddleSystem& system, const Eigen::VectorXd& raw_rhs,
                                const std::map<int, double>& boundary_values);

}  // namespace ensnse
