#include "ensnse/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ensnse/assembly.hpp"

namespace ensnse {

namespace {

// 16-point Gauss-Legendre on [-1,1], positive half; mirrored on use.
constexpr int kGL = 8;
constexpr double kGLx[kGL] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                              0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                              0.9445750230732326, 0.9894009349916499};
constexpr double kGLw[kGL] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                              0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                              0.0622535239386479, 0.0271524594117541};

template <typename F>
double gauss_legendre_16(double a, double b, F&& f) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < kGL; ++i)
    sum += kGLw[i] * (f(mid + half * kGLx[i]) + f(mid - half * kGLx[i]));
  return half * sum;
}

// Integrates callback(cell, bary, x, y) over the mesh with the given rule.
template <typename F>
double integrate_cells(const Mesh& mesh, int quad_degree, F&& integrand) {
  const QuadratureRule rule = quadrature(quad_degree);
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& p0 = mesh.vertices[tri[0]];
    const Vec2& p1 = mesh.vertices[tri[1]];
    const Vec2& p2 = mesh.vertices[tri[2]];
    double area = triangle_area(mesh, t);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double x = l[0] * p0.x + l[1] * p1.x + l[2] * p2.x;
      double y = l[0] * p0.y + l[1] * p1.y + l[2] * p2.y;
      total += 2.0 * area * rule.weights[q] * integrand(t, l, x, y);
    }
  }
  return total;
}

// Discrete velocity and gradient at a quadrature point.
struct DiscreteSample {
  Eigen::Vector2d value;
  Eigen::Matrix2d gradient;  // (r,c) = d u_r / d x_c
};

DiscreteSample sample_velocity(const TaylorHoodSpace& space, const Eigen::VectorXd& u, int t,
                               const std::array<double, 3>& l) {
  const auto geo = space.cell_geometry(t);
  const auto phi = p2_values(l[0], l[1], l[2]);
  const auto grad = p2_gradients(geo, l[0], l[1], l[2]);
  const auto& dofs = space.cell_p2(t);
  const int ns = space.n_scalar();
  DiscreteSample s;
  s.value.setZero();
  s.gradient.setZero();
  for (int i = 0; i < 6; ++i) {
    double cx = u[dofs[i]], cy = u[ns + dofs[i]];
    s.value[0] += phi[i] * cx;
    s.value[1] += phi[i] * cy;
    s.gradient.row(0) += cx * grad[i].transpose();
    s.gradient.row(1) += cy * grad[i].transpose();
  }
  return s;
}

void check_velocity(const TaylorHoodSpace& space, const Eigen::VectorXd& u, const char* who) {
  if (u.size() != space.n_velocity())
    throw std::invalid_argument(std::string(who) + ": velocity coefficient length mismatch");
}

}  // namespace

double l2_error(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                const VectorField& exact, double t, int quad_degree) {
  check_velocity(space, u, "l2_error");
  double sq = integrate_cells(
      space.mesh(), quad_degree, [&](int cell, const std::array<double, 3>& l, double x, double y) {
        auto s = sample_velocity(space, u, cell, l);
        Vec2 e = exact(x, y, t);
        return (s.value - Eigen::Vector2d(e.x, e.y)).squaredNorm();
      });
  return std::sqrt(std::max(0.0, sq));
}

double h1_semi_error(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                     const TensorField& exact_gradient, double t, int quad_degree) {
  check_velocity(space, u, "h1_semi_error");
  double sq = integrate_cells(
      space.mesh(), quad_degree, [&](int cell, const std::array<double, 3>& l, double x, double y) {
        auto s = sample_velocity(space, u, cell, l);
        return (s.gradient - exact_gradient(x, y, t)).squaredNorm();
      });
  return std::sqrt(std::max(0.0, sq));
}

double pressure_l2_error(const TaylorHoodSpace& space, const Eigen::VectorXd& p,
                         const ScalarField& exact, double t, int quad_degree) {
  if (p.size() != space.n_pressure())
    throw std::invalid_argument("pressure_l2_error: pressure coefficient length mismatch");

  // Align both means: the discrete pressure is only fixed up to the
  // multiplier's constant.
  double exact_mean = integrate_cells(
      space.mesh(), quad_degree,
      [&](int, const std::array<double, 3>&, double x, double y) { return exact(x, y, t); });
  Eigen::VectorXd m = pressure_mean_row(space);
  double discrete_mean = m.dot(p);  // domain area is 1

  double sq = integrate_cells(
      space.mesh(), quad_degree, [&](int cell, const std::array<double, 3>& l, double x, double y) {
        const auto psi = p1_values(l[0], l[1], l[2]);
        const auto& verts = space.cell_p1(cell);
        double ph = 0.0;
        for (int i = 0; i < 3; ++i) ph += psi[i] * p[verts[i]];
        double diff = (ph - discrete_mean) - (exact(x, y, t) - exact_mean);
        return diff * diff;
      });
  return std::sqrt(std::max(0.0, sq));
}

double velocity_l2_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u, int quad_degree) {
  check_velocity(space, u, "velocity_l2_norm");
  double sq = integrate_cells(space.mesh(), quad_degree,
                              [&](int cell, const std::array<double, 3>& l, double, double) {
                                return sample_velocity(space, u, cell, l).value.squaredNorm();
                              });
  return std::sqrt(std::max(0.0, sq));
}

double velocity_h1_semi_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                             int quad_degree) {
  check_velocity(space, u, "velocity_h1_semi_norm");
  double sq = integrate_cells(space.mesh(), quad_degree,
                              [&](int cell, const std::array<double, 3>& l, double, double) {
                                return sample_velocity(space, u, cell, l).gradient.squaredNorm();
                              });
  return std::sqrt(std::max(0.0, sq));
}

double velocity_l4_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u, int quad_degree) {
  check_velocity(space, u, "velocity_l4_norm");
  double q4 = integrate_cells(space.mesh(), quad_degree,
                              [&](int cell, const std::array<double, 3>& l, double, double) {
                                double s = sample_velocity(space, u, cell, l).value.squaredNorm();
                                return s * s;
                              });
  return std::pow(std::max(0.0, q4), 0.25);
}

double divergence_l2_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                          int quad_degree) {
  check_velocity(space, u, "divergence_l2_norm");
  double sq = integrate_cells(space.mesh(), quad_degree,
                              [&](int cell, const std::array<double, 3>& l, double, double) {
                                double d = sample_velocity(space, u, cell, l).gradient.trace();
                                return d * d;
                              });
  return std::sqrt(std::max(0.0, sq));
}

double divergence_l4_norm(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                          int quad_degree) {
  check_velocity(space, u, "divergence_l4_norm");
  double q4 = integrate_cells(space.mesh(), quad_degree,
                              [&](int cell, const std::array<double, 3>& l, double, double) {
                                double d = sample_velocity(space, u, cell, l).gradient.trace();
                                return d * d * d * d;
                              });
  return std::pow(std::max(0.0, q4), 0.25);
}

double field_l2_norm(const Mesh& mesh, const VectorField& f, double t, int quad_degree) {
  double sq = integrate_cells(mesh, quad_degree,
                              [&](int, const std::array<double, 3>&, double x, double y) {
                                Vec2 v = f(x, y, t);
                                return v.x * v.x + v.y * v.y;
                              });
  return std::sqrt(std::max(0.0, sq));
}

double discrete_norm_inf0(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("discrete_norm_inf0: empty series");
  double m = 0.0;
  for (double v : series) m = std::max(m, std::abs(v));
  return m;
}

double discrete_norm_20(std::span<const double> series, double dt) {
  if (series.empty()) throw std::invalid_argument("discrete_norm_20: empty series");
  if (!(dt > 0.0)) throw std::invalid_argument("discrete_norm_20: dt must be positive");
  double sq = 0.0;
  for (double v : series) sq += v * v * dt;
  return std::sqrt(sq);
}

double convergence_rate(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0))
    throw std::invalid_argument("convergence_rate: errors must be positive");
  return std::log2(e_coarse / e_fine);
}

double truncation_probe(double gamma, int degree) {
  if (gamma < 0.5 || gamma > 1.0)
    throw std::invalid_argument("truncation_probe: gamma must lie in [1/2, 1]");
  if (degree < 0) throw std::invalid_argument("truncation_probe: degree must be >= 0");

  // Blended weights on (u^{n+1}, u^n, u^{n-1}, u^{n-2}), rational form so
  // gamma = 1/2 lands exactly on (10,-15,6,-1)/6.
  const double a0 = (11.0 - 2.0 * gamma) / 6.0;
  const double a1 = (6.0 * gamma - 18.0) / 6.0;
  const double a2 = (9.0 - 6.0 * gamma) / 6.0;
  const double a3 = (2.0 * gamma - 2.0) / 6.0;

  auto mono = [degree](double t) { return std::pow(t, degree); };
  double weighted = a0 * mono(0.0) + a1 * mono(-1.0) + a2 * mono(-2.0) + a3 * mono(-3.0);
  double exact_derivative = (degree == 1) ? 1.0 : 0.0;  // d/dt t^deg at t = 0
  return weighted - exact_derivative;
}

ConsistencyReport consistency_check(const FlowField& exact, const Mesh& mesh, double t_n,
                                    double dt, int quad_degree) {
  if (!(dt > 0.0)) throw std::invalid_argument("consistency_check: dt must be positive");
  ConsistencyReport rep;
  rep.t_n = t_n;
  rep.dt = dt;

  const double t_np1 = t_n + dt, t_nm1 = t_n - dt, t_nm2 = t_n - 2.0 * dt;

  auto vec_at = [&](const VectorField& f, double x, double y, double t) {
    Vec2 v = f(x, y, t);
    return Eigen::Vector2d(v.x, v.y);
  };

  // lhs1: the blended derivative at gamma = 1/2 against the true derivative.
  rep.lhs1 = integrate_cells(mesh, quad_degree,
                             [&](int, const std::array<double, 3>&, double x, double y) {
                               Eigen::Vector2d d =
                                   (10.0 * vec_at(exact.velocity, x, y, t_np1) -
                                    15.0 * vec_at(exact.velocity, x, y, t_n) +
                                    6.0 * vec_at(exact.velocity, x, y, t_nm1) -
                                    vec_at(exact.velocity, x, y, t_nm2)) /
                                   (6.0 * dt);
                               return (d - vec_at(exact.velocity_t, x, y, t_np1)).squaredNorm();
                             });

  // lhs2: squared H1 seminorm of the cubic-extrapolation residual.
  rep.lhs2 = integrate_cells(mesh, quad_degree,
                             [&](int, const std::array<double, 3>&, double x, double y) {
                               Eigen::Matrix2d g = exact.velocity_gradient(x, y, t_np1) -
                                                   3.0 * exact.velocity_gradient(x, y, t_n) +
                                                   3.0 * exact.velocity_gradient(x, y, t_nm1) -
                                                   exact.velocity_gradient(x, y, t_nm2);
                               return g.squaredNorm();
                             });

  auto ttt_l2_sq = [&](double t) {
    return integrate_cells(mesh, quad_degree,
                           [&](int, const std::array<double, 3>&, double x, double y) {
                             return vec_at(exact.velocity_ttt, x, y, t).squaredNorm();
                           });
  };
  auto ttt_h1_sq = [&](double t) {
    return integrate_cells(mesh, quad_degree,
                           [&](int, const std::array<double, 3>&, double x, double y) {
                             return exact.velocity_ttt_gradient(x, y, t).squaredNorm();
                           });
  };

  double int_ttt = gauss_legendre_16(t_nm2, t_np1, ttt_l2_sq);
  double int_ttt_grad = gauss_legendre_16(t_nm2, t_np1, ttt_h1_sq);

  rep.rhs1 = (7.0 / 3.0) * dt * dt * dt * int_ttt;
  rep.rhs1_grad = (7.0 / 3.0) * dt * dt * dt * int_ttt_grad;
  rep.rhs2 = 9.0 * std::pow(dt, 5) * int_ttt_grad;

  rep.pass1 = rep.lhs1 <= rep.rhs1 * (1.0 + 1e-8);
  rep.pass1_grad = rep.lhs1 <= rep.rhs1_grad * (1.0 + 1e-8);
  rep.pass2 = rep.lhs2 <= rep.rhs2 * (1.0 + 1e-8);
  return rep;
}

LedgerRecord energy_ledger(const TaylorHoodSpace& space, const MemberTrace& trace,
                           double gamma) {
  const bool blended = std::abs(gamma - 0.5) < 1e-14;
  const bool bdf2 = std::abs(gamma - 1.0) < 1e-14;
  if (!blended && !bdf2)
    throw std::invalid_argument("energy_ledger: asserted only for gamma = 1/2 or gamma = 1");
  if (!trace.homogeneous_bc)
    throw std::invalid_argument("energy_ledger: requires a homogeneous-BC trace");
  if (trace.velocity.size() < 4)
    throw std::invalid_argument("energy_ledger: need at least levels 0..3");
  if (trace.forcing_l2.size() != trace.velocity.size())
    throw std::invalid_argument("energy_ledger: forcing series length mismatch");
  if (!(trace.nu > 0.0) || !(trace.dt > 0.0))
    throw std::invalid_argument("energy_ledger: nu and dt must be positive");

  const SpMat M = assemble_mass(space);
  const SpMat A = assemble_stiffness(space);
  auto nsq = [&M](const Eigen::VectorXd& v) { return v.dot(M * v); };
  auto gsq = [&A](const Eigen::VectorXd& v) { return v.dot(A * v); };

  const auto& u = trace.velocity;
  const int nt = static_cast<int>(u.size()) - 1;
  const double dt = trace.dt, nu = trace.nu;

  auto g_functional = [&](int n) {
    if (blended)
      return (nsq(u[n]) + nsq(3.0 * u[n] - u[n - 1]) +
              nsq(3.0 * u[n] - 3.0 * u[n - 1] + u[n - 2])) /
             12.0;
    return (nsq(u[n]) + nsq(2.0 * u[n] - u[n - 1])) / 4.0;
  };

  LedgerRecord rec;
  rec.first_n = 3;
  const double g_start = g_functional(2);
  double diff_sum = 0.0, diss_sum = 0.0, force_sum = 0.0;

  for (int n = 2; n < nt; ++n) {
    if (blended)
      diff_sum += nsq(u[n + 1] - 3.0 * u[n] + 3.0 * u[n - 1] - u[n - 2]) / 24.0;
    else
      diff_sum += nsq(u[n + 1] - 2.0 * u[n] + u[n - 1]) / 8.0;
    diss_sum += (dt / 4.0) * nu * gsq(u[n + 1]);
    double fneg = kPoincareUnitSquare * trace.forcing_l2[n + 1];
    force_sum += (dt / nu) * fneg * fneg;

    rec.lhs.push_back(g_functional(n + 1) + diff_sum + diss_sum);
    rec.rhs.push_back(force_sum + g_start);
  }

  // Zero data makes both sides vanish; count that as ratio 0, not 0/0.
  rec.max_ratio = 0.0;
  bool ok = true;
  for (std::size_t k = 0; k < rec.lhs.size(); ++k) {
    if (rec.rhs[k] > 0.0)
      rec.max_ratio = std::max(rec.max_ratio, rec.lhs[k] / rec.rhs[k]);
    else
      ok = ok && rec.lhs[k] <= 0.0;
  }
  rec.satisfied = ok && rec.max_ratio <= 1.0 + 1e-10;
  return rec;
}

}  // namespace ensnse
