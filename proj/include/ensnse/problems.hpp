#pragma once

#include <array>

#include "ensnse/femspace.hpp"

namespace ensnse {

// Closed-form space-time flow with enough derivatives for the consistency
// instruments: velocity, its spatial gradient, pressure, forcing, u_t,
// u_ttt and grad(u_ttt).
struct FlowField {
  VectorField velocity;
  TensorField velocity_gradient;
  ScalarField pressure;
  VectorField forcing;
  VectorField velocity_t;
  VectorField velocity_ttt;
  TensorField velocity_ttt_gradient;
};

// An analytic benchmark problem plus its ensemble perturbation rule. A
// member with perturbation eps solves the same equations with velocity
// scaled by (1+eps), pressure by (1+eps)^2 and forcing by (1+eps); the
// momentum residual stays identically zero because the nonlinear term and
// the pressure gradient cancel for the base flow.
struct AnalyticProblem {
  double nu = 0.0;
  FlowField base;
  FlowField member(double eps) const;
};

// Decaying vortex array on the unit square:
//   u = g(t) (-cos x sin y, sin x cos y),  g = sin(2t)
//   p = -g(t)^2 (cos 2x + cos 2y) / 4
//   f = (g' + 2 nu g) (-cos x sin y, sin x cos y)
// u.grad u + grad p vanishes identically, so f carries only the Stokes part.
AnalyticProblem green_taylor(double nu);

// 3D exponential Beltrami flow, used as an evaluable reference field only
// (no 3D solver here):
//   u1 = -a (e^{ax} sin(ay+dz) + e^{az} cos(ax+dy)) e^{-nu d^2 t}, cyclic in
//   (x,y,z) for u2, u3; pressure the matching quadratic-exponential form.
// Satisfies the incompressible momentum equations with zero forcing.
struct BeltramiField3D {
  double a = 1.25;
  double d = 2.25;
  double nu = 1.0;

  std::array<double, 3> velocity(double x, double y, double z, double t) const;
  double pressure(double x, double y, double z, double t) const;
};

BeltramiField3D ethier_steinman(double a, double d, double nu);

}  // namespace ensnse
