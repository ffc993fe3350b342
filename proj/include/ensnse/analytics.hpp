#pragma once

#include <span>
#include <vector>

#include "ensnse/femspace.hpp"
#include "ensnse/problems.hpp"

namespace ensnse {

// ---------------------------------------------------------------------------
// Spatial norms and errors (degree-7 quadrature by default). The L4 norms
// integrate the 4th power of a piecewise-quadratic, a degree-8 integrand the
// default rule still handles exactly.
// ---------------------------------------------------------------------------
double l2_error(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                const VectorField& exact, double t, int quad_degree = 7);
double h1_semi_error(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                     const TensorField& exact_gradient, double t, int quad_degree = 7);
// Both pressures are shifted to zero mean before comparing; the discrete
// pressure is only determined up to the constant the multiplier pins.
double pressure_l2_error(const TaylorHoodSpace& space, const Eigen::VectorXd& p,
                         const ScalarField& exact, double t, int quad_degree = 7);

double velocity_l2_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                        int quad_degree = 7);
double velocity_h1_semi_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                             int quad_degree = 7);
double velocity_l4_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                        int quad_degree = 7);
double divergence_l2_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                          int quad_degree = 7);
double divergence_l4_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                          int quad_degree = 7);

// L2 norm of an analytic field over the meshed domain (no FE space involved).
double field_l2_norm(const Mesh& mesh, const VectorField& f, double t, int quad_degree = 7);

// ---------------------------------------------------------------------------
// Discrete-in-time norms over a per-step series v^0..v^N:
//   inf0 = max_n |v^n|,   20 = sqrt(sum_n |v^n|^2 dt).
// ---------------------------------------------------------------------------
double discrete_norm_inf0(std::span<const double> series);
double discrete_norm_20(std::span<const double> series, double dt);

// log2(e_coarse / e_fine) for a halved step; throws unless both are positive.
double convergence_rate(double e_coarse, double e_fine);

// Per-step error records of one ensemble member, sampled at every time level
// including the startup levels.
struct ErrorSeries {
  double dt = 0.0;
  double h = 0.0;
  std::vector<double> t;
  std::vector<double> velocity_l2;
  std::vector<double> velocity_h1;  // H1 seminorm of the error
  std::vector<double> pressure_l2;
};

// ---------------------------------------------------------------------------
// Timestepping instruments.
// ---------------------------------------------------------------------------

// Applies the blended four-level derivative weights to u(t) = t^degree with
// dt = 1 on nodes {0,-1,-2,-3} (newest first) and subtracts the exact
// derivative at t = 0. Zero through degree 2; for cubics the value is the
// truncation constant: -1 at gamma = 1/2, -2 at gamma = 1.
double truncation_probe(double gamma, int degree);

// Checks the two local consistency bounds of the blended derivative at one
// time station, all norms over the given mesh:
//   (1) || D_{1/2} u - u_t(t^{n+1}) ||^2        vs (7/3) dt^3 * time-integral
//   (2) || grad(u^{n+1} - 3u^n + 3u^{n-1} - u^{n-2}) ||^2  vs  9 dt^5 * time-integral
// The time integrals run over [t^{n-2}, t^{n+1}] via 16-point Gauss-Legendre.
// rhs1 integrates ||u_ttt||^2 (the variant the detailed proof ends with);
// rhs1_grad integrates ||grad u_ttt||^2 and is recorded alongside.
struct ConsistencyReport {
  double t_n = 0.0;
  double dt = 0.0;
  double lhs1 = 0.0, rhs1 = 0.0, rhs1_grad = 0.0;
  double lhs2 = 0.0, rhs2 = 0.0;
  bool pass1 = false;       // lhs1 <= rhs1
  bool pass1_grad = false;  // lhs1 <= rhs1_grad
  bool pass2 = false;       // lhs2 <= rhs2
};
ConsistencyReport consistency_check(const FlowField& exact, const Mesh& mesh, double t_n,
                                    double dt, int quad_degree = 7);

// ---------------------------------------------------------------------------
// Energy ledger. One member's full trajectory plus forcing norms; asserts the
// discrete energy bound of the scheme at every reachable N. Levels 0..2 are
// the given starting data; sums run from n = 2. The dual norm of the forcing
// is majorized by C_P ||f|| with the unit-square Poincare constant
// C_P = 1/(pi sqrt(2)).
// ---------------------------------------------------------------------------
struct MemberTrace {
  std::vector<Eigen::VectorXd> velocity;  // levels 0..N_T
  std::vector<double> forcing_l2;         // ||f^n||, same indexing
  double dt = 0.0;
  double nu = 0.0;
  bool homogeneous_bc = false;
};

struct LedgerRecord {
  int first_n = 3;
  std::vector<double> lhs, rhs;  // entry k is level first_n + k
  double max_ratio = 0.0;        // max lhs/rhs
  bool satisfied = false;
};

// gamma = 0.5 uses the blended G-identity (1/12, 1/24 weights and the third
// difference); gamma = 1 the BDF2 one (1/4, 1/8 weights, second difference).
// Other gamma values and inhomogeneous-BC traces are rejected.
LedgerRecord energy_ledger(const TaylorHoodSpace& space, const MemberTrace& trace,
                           double gamma);

inline constexpr double kPoincareUnitSquare = 0.22507907903927651;  // 1/(pi sqrt 2)

}  // namespace ensnse
