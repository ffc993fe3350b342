#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ensnse/assembly.hpp"
#include "ensnse/linsolve.hpp"
#include "ensnse/problems.hpp"

namespace ensnse {

// Two ensemble timestepping schemes over a shared coefficient shape:
//   Blended: four-level derivative D_gamma, cubic extrapolation (3,-3,1)
//            for the ensemble mean and the lagged convection argument.
//   EnBdf2:  classical three-level BDF2 derivative, linear extrapolation
//            (2,-1,0). alpha[3] = 0, so the u^{n-2} column is inert.
enum class SchemeKind { Blended, EnBdf2 };

struct SchemeCoefficients {
  SchemeKind kind = SchemeKind::Blended;
  double gamma = 0.5;
  // Derivative weights on (u^{n+1}, u^n, u^{n-1}, u^{n-2}); the scheme term
  // is sum_i alpha[i] u^{n+1-i} / dt. Sums to zero; first-order consistency
  // sum_i (-i) alpha[i] = 1.
  std::array<double, 4> alpha{};
  // Extrapolation weights on (u^n, u^{n-1}, u^{n-2}).
  std::array<double, 3> beta{};
};

// Blended family: alpha = gamma (3/2,-2,1/2,0) + (1-gamma)(11/6,-3,3/2,-1/3),
// evaluated in the rational form ((11-2g)/6, (6g-18)/6, (9-6g)/6, (2g-2)/6)
// so gamma = 1/2 lands exactly on (10,-15,6,-1)/6 and gamma = 1 on BDF2
// weights. gamma outside [1/2, 1] throws.
SchemeCoefficients bdf_coefficients(double gamma);
SchemeCoefficients en_bdf2_coefficients();

// Operators that depend only on the space; assembled once and shared.
struct SpaceOperators {
  SpMat mass;        // velocity block
  SpMat stiffness;   // velocity block, no viscosity factor
  SpMat graddiv;     // velocity block
  SpMat divergence;  // pressure x velocity
  Eigen::VectorXd mean_row;
  int quad_degree = 5;
};
std::shared_ptr<const SpaceOperators> build_operators(const TaylorHoodSpace& space,
                                                      int quad_degree = 5);

struct MemberProblem {
  VectorField forcing;
  VectorField boundary;  // Dirichlet velocity data, enforced nodally
};

// Full ensemble state between steps. History holds the three newest levels,
// oldest first: u[j] = (u^{n-2}, u^{n-1}, u^n) at time index n = step_index.
struct EnsembleState {
  std::shared_ptr<const TaylorHoodSpace> space;
  std::shared_ptr<const SpaceOperators> ops;
  SchemeCoefficients scheme;
  double dt = 0.0;
  double nu = 0.0;
  double grad_div = 0.0;       // gamma_gd
  double cfl_threshold = 1.0;  // advisory; crossing it flags, never aborts
  double t0 = 0.0;             // time of level 0
  int step_index = 2;
  bool homogeneous_bc = false;
  std::vector<MemberProblem> members;
  std::vector<std::array<Eigen::VectorXd, 3>> velocity;
  std::vector<Eigen::VectorXd> pressure;  // latest per member, empty until first advance

  // Shared solver; keeps the symbolic analysis across steps.
  std::shared_ptr<PatternReusingSolver> solver;

  int n_members() const { return static_cast<int>(members.size()); }
  double time() const { return t0 + step_index * dt; }
};

// beta-weighted extrapolant of member j's history toward t^{n+1}; the
// ensemble mean is the member average of these, and the fluctuation is the
// member's extrapolant minus the mean. Fluctuations sum to zero exactly up
// to roundoff.
Eigen::VectorXd extrapolant(const EnsembleState& state, int member);
Eigen::VectorXd ensemble_mean(const EnsembleState& state);
Eigen::VectorXd fluctuation(const EnsembleState& state, int member);

// Member-independent matrix of the step:
//   F = (alpha0/dt) M + nu A + N(<u>) + gamma_gd G
// wrapped in the saddle structure with value-independent Dirichlet rows.
SaddleSystem build_shared_operator(const EnsembleState& state);

// Raw (unconstrained) right-hand side of member j at the current step:
//   M (-alpha1 u^n - alpha2 u^{n-1} - alpha3 u^{n-2}) / dt
//   + (f_j(t^{n+1}), v) - b*(u'_j, extrapolant_j, v)
Eigen::VectorXd member_rhs(const EnsembleState& state, int member);

// CFL-style stability indicators for member j's fluctuation:
//   kappa    = dt ||grad u'||^2 / (nu h)
//   kappa_2d = dt (||u'|| + ||div u'||)^2 / (nu h), L2 or L4 norms.
double cfl_indicator(const EnsembleState& state, int member);
double cfl_indicator_2d(const EnsembleState& state, int member, bool l4_variant = false);

struct MemberReport {
  double cfl = 0.0;
  double cfl_2d = 0.0;
  double kinetic_energy = 0.0;   // 1/2 ||u^{n+1}||^2
  double grad_norm_sq = 0.0;     // ||grad u^{n+1}||^2
  double div_residual = 0.0;     // ||B u^{n+1}||
  double solve_residual = 0.0;   // ||K x - b|| / ||b||
  double multiplier = 0.0;       // lambda
};

struct StepReport {
  int step_index = 0;       // index n+1 just computed
  double time = 0.0;        // t^{n+1}
  bool factorization_reused = true;  // one factorization served all members
  bool cfl_flagged = false;          // some kappa exceeded the threshold
  std::vector<MemberReport> members;
};

// One ensemble step: assembles the shared operator, factorizes once, solves
// all members against it, rolls the history and advances step_index. Throws
// BlowupError when a velocity norm stops being finite and SolverError when
// the factorization fails.
StepReport advance(EnsembleState& state);

struct BlowupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class StartupMode { Exact, CrankNicolson };

// Builds the three starting levels for an analytic problem whose members are
// the (1 + eps_j) rescalings. Exact: nodal interpolation at t0, t0+dt,
// t0+2dt. CrankNicolson: level 0 interpolated, then two linearized CN steps
// per member (predictor/corrector on the first); agrees with Exact to the
// scheme's own order.
EnsembleState startup(std::shared_ptr<const TaylorHoodSpace> space,
                      const AnalyticProblem& problem, const std::vector<double>& epsilons,
                      const SchemeCoefficients& scheme, double dt, double t0,
                      StartupMode mode, double grad_div = 0.0, double cfl_threshold = 1.0,
                      int quad_degree = 5);

// Starting state from per-member initial velocity fields held constant over
// the three history levels (given-data startup for decay experiments).
// Boundary data is frozen to the initial trace; forcing defaults to zero.
EnsembleState startup_constant(std::shared_ptr<const TaylorHoodSpace> space,
                               const std::vector<VectorField>& initial,
                               const SchemeCoefficients& scheme, double dt, double nu,
                               double t0 = 0.0, double grad_div = 0.0,
                               double cfl_threshold = 1.0, int quad_degree = 5);

// Reference single-member BDF2 step with linearly extrapolated convection,
// written against the same operator blocks but none of the ensemble
// machinery; the J = 1 reduction checks of the ensemble path compare to it.
struct PlainBdf2State {
  std::shared_ptr<const TaylorHoodSpace> space;
  std::shared_ptr<const SpaceOperators> ops;
  double dt = 0.0, nu = 0.0, grad_div = 0.0, t0 = 0.0;
  int step_index = 1;
  MemberProblem problem;
  Eigen::VectorXd u_prev, u_curr;  // u^{n-1}, u^n
  Eigen::VectorXd pressure;
  double time() const { return t0 + step_index * dt; }
};
void plain_bdf2_advance(PlainBdf2State& state);

}  // namespace ensnse
