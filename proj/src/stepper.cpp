#include "ensnse/stepper.hpp"

#include <cmath>
#include <stdexcept>

#include "ensnse/analytics.hpp"

namespace ensnse {

namespace {

void check_state(const EnsembleState& st) {
  if (!st.space || !st.ops) throw std::invalid_argument("stepper: state missing space/operators");
  if (!(st.dt > 0.0) || !(st.nu > 0.0))
    throw std::invalid_argument("stepper: dt and nu must be positive");
  if (st.members.empty() || st.velocity.size() != st.members.size())
    throw std::invalid_argument("stepper: member data inconsistent");
  const Eigen::Index nv = st.space->n_velocity();
  for (const auto& levels : st.velocity)
    for (const auto& u : levels)
      if (u.size() != nv) throw std::invalid_argument("stepper: history length mismatch");
}

Eigen::VectorXd boundary_values_at(const TaylorHoodSpace& space,
                                   const std::vector<int>& constrained,
                                   const VectorField& g, double t) {
  const int ns = space.n_scalar();
  Eigen::VectorXd vals(static_cast<Eigen::Index>(constrained.size()));
  for (std::size_t s = 0; s < constrained.size(); ++s) {
    int dof = constrained[s];
    int node = dof < ns ? dof : dof - ns;
    Vec2 p = space.node_position(node);
    Vec2 v = g(p.x, p.y, t);
    vals[static_cast<Eigen::Index>(s)] = dof < ns ? v.x : v.y;
  }
  return vals;
}

std::vector<int> constrained_dofs(const TaylorHoodSpace& space) {
  const int ns = space.n_scalar();
  std::vector<int> dofs;
  dofs.reserve(2 * space.dirichlet_nodes().size());
  for (int k : space.dirichlet_nodes()) dofs.push_back(k);
  for (int k : space.dirichlet_nodes()) dofs.push_back(ns + k);
  return dofs;
}

VectorField zero_field() {
  return [](double, double, double) { return Vec2{0.0, 0.0}; };
}

// Shared by advance and the plain BDF2 reference: solve one saddle system
// for given velocity block, rhs columns and boundary values.
struct SolveOutput {
  Eigen::VectorXd u, p;
  double lambda = 0.0;
  double solve_residual = 0.0;
};

SolveOutput extract_member(const SaddleSystem& sys, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& B, const SpMat& K, int col) {
  SolveOutput out;
  Eigen::VectorXd x = X.col(col);
  out.u = x.head(sys.n_velocity);
  out.p = -x.segment(sys.n_velocity, sys.n_pressure);
  out.lambda = x[sys.n_velocity + sys.n_pressure];
  double bnorm = B.col(col).norm();
  out.solve_residual = (K * x - B.col(col)).norm() / (bnorm > 0.0 ? bnorm : 1.0);
  return out;
}

}  // namespace

SchemeCoefficients bdf_coefficients(double gamma) {
  if (!(gamma >= 0.5 && gamma <= 1.0))
    throw std::invalid_argument("bdf_coefficients: gamma must lie in [1/2, 1]");
  SchemeCoefficients c;
  c.kind = SchemeKind::Blended;
  c.gamma = gamma;
  c.alpha = {(11.0 - 2.0 * gamma) / 6.0, (6.0 * gamma - 18.0) / 6.0,
             (9.0 - 6.0 * gamma) / 6.0, (2.0 * gamma - 2.0) / 6.0};
  c.beta = {3.0, -3.0, 1.0};
  return c;
}

SchemeCoefficients en_bdf2_coefficients() {
  SchemeCoefficients c;
  c.kind = SchemeKind::EnBdf2;
  c.gamma = 1.0;
  c.alpha = {1.5, -2.0, 0.5, 0.0};
  c.beta = {2.0, -1.0, 0.0};
  return c;
}

std::shared_ptr<const SpaceOperators> build_operators(const TaylorHoodSpace& space,
                                                      int quad_degree) {
  auto ops = std::make_shared<SpaceOperators>();
  ops->quad_degree = quad_degree;
  ops->mass = assemble_mass(space, quad_degree);
  ops->stiffness = assemble_stiffness(space, quad_degree);
  ops->graddiv = assemble_graddiv(space, quad_degree);
  ops->divergence = assemble_divergence(space, quad_degree);
  ops->mean_row = pressure_mean_row(space, quad_degree);
  return ops;
}

Eigen::VectorXd extrapolant(const EnsembleState& state, int member) {
  const auto& b = state.scheme.beta;
  const auto& u = state.velocity[member];
  // History is stored oldest first: u[0] = u^{n-2}, u[2] = u^n.
  return b[0] * u[2] + b[1] * u[1] + b[2] * u[0];
}

Eigen::VectorXd ensemble_mean(const EnsembleState& state) {
  check_state(state);
  Eigen::VectorXd sum = extrapolant(state, 0);
  for (int j = 1; j < state.n_members(); ++j) sum += extrapolant(state, j);
  return sum / static_cast<double>(state.n_members());
}

Eigen::VectorXd fluctuation(const EnsembleState& state, int member) {
  return extrapolant(state, member) - ensemble_mean(state);
}

SaddleSystem build_shared_operator(const EnsembleState& state) {
  check_state(state);
  const auto& ops = *state.ops;
  Eigen::VectorXd mean = ensemble_mean(state);
  SpMat F = (state.scheme.alpha[0] / state.dt) * ops.mass + state.nu * ops.stiffness +
            assemble_convection(*state.space, {Layout::VelocityVector, std::move(mean)},
                                ops.quad_degree);
  if (state.grad_div != 0.0) F = F + state.grad_div * ops.graddiv;
  return build_saddle(*state.space, F, ops.divergence, ops.mean_row,
                      constrained_dofs(*state.space));
}

Eigen::VectorXd member_rhs(const EnsembleState& state, int member) {
  check_state(state);
  const auto& a = state.scheme.alpha;
  const auto& u = state.velocity[member];
  const double t_new = state.time() + state.dt;

  Eigen::VectorXd hist = (-a[1]) * u[2] + (-a[2]) * u[1] + (-a[3]) * u[0];
  Eigen::VectorXd rhs_u = state.ops->mass * (hist / state.dt);
  rhs_u += assemble_load(*state.space, state.members[member].forcing, t_new,
                         state.ops->quad_degree);
  rhs_u -= convection_apply(*state.space, fluctuation(state, member),
                            extrapolant(state, member), state.ops->quad_degree);

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(state.space->n_velocity() +
                                              state.space->n_pressure() + 1);
  rhs.head(state.space->n_velocity()) = rhs_u;
  return rhs;
}

double cfl_indicator(const EnsembleState& state, int member) {
  Eigen::VectorXd fluct = fluctuation(state, member);
  double grad_sq = fluct.dot(state.ops->stiffness * fluct);
  return state.dt * grad_sq / (state.nu * state.space->mesh().h);
}

double cfl_indicator_2d(const EnsembleState& state, int member, bool l4_variant) {
  Eigen::VectorXd fluct = fluctuation(state, member);
  double vn, dn;
  if (l4_variant) {
    // Proof-route variant through the Ladyzhenskaya embedding.
    vn = velocity_l4_norm(*state.space, fluct);
    dn = divergence_l4_norm(*state.space, fluct);
  } else {
    vn = std::sqrt(std::max(0.0, fluct.dot(state.ops->mass * fluct)));
    dn = std::sqrt(std::max(0.0, fluct.dot(state.ops->graddiv * fluct)));
  }
  double s = vn + dn;
  return state.dt * s * s / (state.nu * state.space->mesh().h);
}

StepReport advance(EnsembleState& state) {
  check_state(state);
  const int J = state.n_members();
  const auto& space = *state.space;
  const double t_new = state.time() + state.dt;

  StepReport report;
  report.step_index = state.step_index + 1;
  report.time = t_new;
  report.members.resize(J);

  // Stability indicators are functions of the pre-step fluctuations.
  for (int j = 0; j < J; ++j) {
    report.members[j].cfl = cfl_indicator(state, j);
    report.members[j].cfl_2d = cfl_indicator_2d(state, j);
    if (report.members[j].cfl > state.cfl_threshold) report.cfl_flagged = true;
  }

  SaddleSystem sys = build_shared_operator(state);
  if (!state.solver) state.solver = std::make_shared<PatternReusingSolver>();
  try {
    state.solver->factorize(sys.matrix);
  } catch (const std::runtime_error& e) {
    throw SolverError(e.what());
  }

  Eigen::MatrixXd rhs(sys.size(), J);
  for (int j = 0; j < J; ++j) {
    Eigen::VectorXd bv = boundary_values_at(space, sys.constrained,
                                            state.members[j].boundary, t_new);
    rhs.col(j) = constrained_rhs(sys, member_rhs(state, j), bv);
  }
  Eigen::MatrixXd X = state.solver->solve_multi(rhs);

  for (int j = 0; j < J; ++j) {
    SolveOutput out = extract_member(sys, X, rhs, sys.matrix, j);
    double energy = 0.5 * out.u.dot(state.ops->mass * out.u);
    if (!std::isfinite(energy) || energy > 1e30)
      throw BlowupError("stepper: member " + std::to_string(j) +
                        " velocity blew up at t = " + std::to_string(t_new));
    auto& mr = report.members[j];
    mr.kinetic_energy = energy;
    mr.grad_norm_sq = out.u.dot(state.ops->stiffness * out.u);
    mr.div_residual = (state.ops->divergence * out.u).norm();
    mr.solve_residual = out.solve_residual;
    mr.multiplier = out.lambda;

    auto& levels = state.velocity[j];
    levels[0] = std::move(levels[1]);
    levels[1] = std::move(levels[2]);
    levels[2] = std::move(out.u);
    if (state.pressure.size() != static_cast<std::size_t>(J))
      state.pressure.assign(J, Eigen::VectorXd());
    state.pressure[j] = std::move(out.p);
  }
  state.step_index += 1;
  return report;
}

namespace {

// One linearized Crank-Nicolson step: convecting field w frozen, endpoint
// Dirichlet data, divergence constraint on the new level. Returns velocity
// and (negated) pressure.
std::pair<Eigen::VectorXd, Eigen::VectorXd> cn_step(
    const TaylorHoodSpace& space, const SpaceOperators& ops, const Eigen::VectorXd& u_old,
    const Eigen::VectorXd& w, const MemberProblem& prob, double nu, double grad_div,
    double dt, double t_old) {
  SpMat N = assemble_convection(space, {Layout::VelocityVector, w}, ops.quad_degree);
  SpMat F = (1.0 / dt) * ops.mass + (0.5 * nu) * ops.stiffness + 0.5 * N;
  if (grad_div != 0.0) F = F + (0.5 * grad_div) * ops.graddiv;
  SaddleSystem sys = build_saddle(space, F, ops.divergence, ops.mean_row,
                                  constrained_dofs(space));

  Eigen::VectorXd rhs_u = ops.mass * (u_old / dt) - (0.5 * nu) * (ops.stiffness * u_old) -
                          0.5 * (N * u_old);
  if (grad_div != 0.0) rhs_u -= (0.5 * grad_div) * (ops.graddiv * u_old);
  rhs_u += assemble_load(space, prob.forcing, t_old + 0.5 * dt, ops.quad_degree);

  Eigen::VectorXd raw = Eigen::VectorXd::Zero(sys.size());
  raw.head(space.n_velocity()) = rhs_u;
  Eigen::VectorXd bv = boundary_values_at(space, sys.constrained, prob.boundary, t_old + dt);
  Eigen::VectorXd rhs = constrained_rhs(sys, raw, bv);

  Factorization f = Factorization::compute(sys.matrix);
  Eigen::VectorXd x = f.solve(rhs);
  return {x.head(space.n_velocity()),
          -x.segment(space.n_velocity(), space.n_pressure())};
}

}  // namespace

EnsembleState startup(std::shared_ptr<const TaylorHoodSpace> space,
                      const AnalyticProblem& problem, const std::vector<double>& epsilons,
                      const SchemeCoefficients& scheme, double dt, double t0,
                      StartupMode mode, double grad_div, double cfl_threshold,
                      int quad_degree) {
  if (!space) throw std::invalid_argument("startup: null space");
  if (epsilons.empty()) throw std::invalid_argument("startup: need at least one member");
  if (!(dt > 0.0)) throw std::invalid_argument("startup: dt must be positive");
  if (!(problem.nu > 0.0)) throw std::invalid_argument("startup: nu must be positive");

  EnsembleState st;
  st.space = space;
  st.ops = build_operators(*space, quad_degree);
  st.scheme = scheme;
  st.dt = dt;
  st.nu = problem.nu;
  st.grad_div = grad_div;
  st.cfl_threshold = cfl_threshold;
  st.t0 = t0;
  st.step_index = 2;
  st.homogeneous_bc = false;

  const int J = static_cast<int>(epsilons.size());
  st.members.resize(J);
  st.velocity.resize(J);
  st.pressure.resize(J);

  for (int j = 0; j < J; ++j) {
    FlowField fields = problem.member(epsilons[j]);
    st.members[j].forcing = fields.forcing;
    st.members[j].boundary = fields.velocity;

    if (mode == StartupMode::Exact) {
      for (int lvl = 0; lvl < 3; ++lvl)
        st.velocity[j][lvl] =
            interpolate_velocity(*space, fields.velocity, t0 + lvl * dt).values;
      st.pressure[j] = interpolate_pressure(*space, fields.pressure, t0 + 2.0 * dt).values;
    } else {
      Eigen::VectorXd u0 = interpolate_velocity(*space, fields.velocity, t0).values;
      // Step 1 with predictor/corrector so the convecting field sits at the
      // interval midpoint to second order.
      Eigen::VectorXd u1_pred =
          cn_step(*space, *st.ops, u0, u0, st.members[j], st.nu, grad_div, dt, t0).first;
      Eigen::VectorXd w1 = 0.5 * (u0 + u1_pred);
      auto [u1, p1] =
          cn_step(*space, *st.ops, u0, w1, st.members[j], st.nu, grad_div, dt, t0);
      // Step 2 extrapolates the convecting field to t^{3/2}.
      Eigen::VectorXd w2 = 1.5 * u1 - 0.5 * u0;
      auto [u2, p2] =
          cn_step(*space, *st.ops, u1, w2, st.members[j], st.nu, grad_div, dt, t0 + dt);
      st.velocity[j] = {std::move(u0), std::move(u1), std::move(u2)};
      st.pressure[j] = std::move(p2);
    }
  }
  return st;
}

EnsembleState startup_constant(std::shared_ptr<const TaylorHoodSpace> space,
                               const std::vector<VectorField>& initial,
                               const SchemeCoefficients& scheme, double dt, double nu,
                               double t0, double grad_div, double cfl_threshold,
                               int quad_degree) {
  if (!space) throw std::invalid_argument("startup_constant: null space");
  if (initial.empty()) throw std::invalid_argument("startup_constant: need members");
  if (!(dt > 0.0) || !(nu > 0.0))
    throw std::invalid_argument("startup_constant: dt and nu must be positive");

  EnsembleState st;
  st.space = space;
  st.ops = build_operators(*space, quad_degree);
  st.scheme = scheme;
  st.dt = dt;
  st.nu = nu;
  st.grad_div = grad_div;
  st.cfl_threshold = cfl_threshold;
  st.t0 = t0;
  st.step_index = 2;

  const int J = static_cast<int>(initial.size());
  const int ns = space->n_scalar();
  st.members.resize(J);
  st.velocity.resize(J);
  st.pressure.resize(J);

  bool boundary_zero = true;
  for (int j = 0; j < J; ++j) {
    Eigen::VectorXd u0 = interpolate_velocity(*space, initial[j], t0).values;
    for (int k : space->dirichlet_nodes())
      if (std::abs(u0[k]) > 1e-13 || std::abs(u0[ns + k]) > 1e-13) boundary_zero = false;
    st.velocity[j] = {u0, u0, u0};
    st.members[j].forcing = zero_field();
    st.pressure[j] = Eigen::VectorXd::Zero(space->n_pressure());
  }
  for (int j = 0; j < J; ++j)
    st.members[j].boundary =
        boundary_zero ? zero_field() : VectorField([f = initial[j], t0](double x, double y,
                                                                        double) {
            return f(x, y, t0);
          });
  st.homogeneous_bc = boundary_zero;
  return st;
}

void plain_bdf2_advance(PlainBdf2State& state) {
  if (!state.space || !state.ops) throw std::invalid_argument("plain_bdf2: missing space");
  const auto& space = *state.space;
  const auto& ops = *state.ops;
  const double dt = state.dt;
  const double t_new = state.time() + dt;

  // BDF2 with linearly extrapolated convecting field 2 u^n - u^{n-1};
  // straight-line single-member implementation, no ensemble code involved.
  Eigen::VectorXd w = 2.0 * state.u_curr - state.u_prev;
  SpMat F = state.nu * ops.stiffness +
            assemble_convection(space, {Layout::VelocityVector, w}, ops.quad_degree) +
            (1.5 / dt) * ops.mass;
  if (state.grad_div != 0.0) F = F + state.grad_div * ops.graddiv;
  SaddleSystem sys = build_saddle(space, F, ops.divergence, ops.mean_row,
                                  constrained_dofs(space));

  Eigen::VectorXd rhs_u =
      ops.mass * ((2.0 * state.u_curr - 0.5 * state.u_prev) / dt) +
      assemble_load(space, state.problem.forcing, t_new, ops.quad_degree);
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(sys.size());
  raw.head(space.n_velocity()) = rhs_u;
  Eigen::VectorXd bv =
      boundary_values_at(space, sys.constrained, state.problem.boundary, t_new);
  Eigen::VectorXd rhs = constrained_rhs(sys, raw, bv);

  Factorization f = Factorization::compute(sys.matrix);
  Eigen::VectorXd x = f.solve(rhs);
  state.u_prev = std::move(state.u_curr);
  state.u_curr = x.head(space.n_velocity());
  state.pressure = -x.segment(space.n_velocity(), space.n_pressure());
  state.step_index += 1;
}

}  // namespace ensnse
