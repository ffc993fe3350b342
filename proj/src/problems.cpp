#include "ensnse/problems.hpp"

#include <cmath>

namespace ensnse {

namespace {

// g and its derivatives: g = sin 2t, g' = 2 cos 2t, g'' = -4 sin 2t,
// g''' = -8 cos 2t.
double gt_g(double t) { return std::sin(2.0 * t); }
double gt_gp(double t) { return 2.0 * std::cos(2.0 * t); }
double gt_gppp(double t) { return -8.0 * std::cos(2.0 * t); }

Vec2 gt_shape(double x, double y) {
  return {-std::cos(x) * std::sin(y), std::sin(x) * std::cos(y)};
}

Eigen::Matrix2d gt_shape_grad(double x, double y) {
  Eigen::Matrix2d g;
  g(0, 0) = std::sin(x) * std::sin(y);
  g(0, 1) = -std::cos(x) * std::cos(y);
  g(1, 0) = std::cos(x) * std::cos(y);
  g(1, 1) = -std::sin(x) * std::sin(y);
  return g;
}

}  // namespace

FlowField AnalyticProblem::member(double eps) const {
  const double s = 1.0 + eps;
  FlowField f;
  f.velocity = [s, v = base.velocity](double x, double y, double t) {
    Vec2 u = v(x, y, t);
    return Vec2{s * u.x, s * u.y};
  };
  f.velocity_gradient = [s, g = base.velocity_gradient](double x, double y, double t) {
    return Eigen::Matrix2d(s * g(x, y, t));
  };
  f.pressure = [s, p = base.pressure](double x, double y, double t) {
    return s * s * p(x, y, t);
  };
  f.forcing = [s, ff = base.forcing](double x, double y, double t) {
    Vec2 u = ff(x, y, t);
    return Vec2{s * u.x, s * u.y};
  };
  f.velocity_t = [s, v = base.velocity_t](double x, double y, double t) {
    Vec2 u = v(x, y, t);
    return Vec2{s * u.x, s * u.y};
  };
  f.velocity_ttt = [s, v = base.velocity_ttt](double x, double y, double t) {
    Vec2 u = v(x, y, t);
    return Vec2{s * u.x, s * u.y};
  };
  f.velocity_ttt_gradient = [s, g = base.velocity_ttt_gradient](double x, double y, double t) {
    return Eigen::Matrix2d(s * g(x, y, t));
  };
  return f;
}

AnalyticProblem green_taylor(double nu) {
  AnalyticProblem prob;
  prob.nu = nu;

  prob.base.velocity = [](double x, double y, double t) {
    Vec2 w = gt_shape(x, y);
    double g = gt_g(t);
    return Vec2{g * w.x, g * w.y};
  };
  prob.base.velocity_gradient = [](double x, double y, double t) {
    return Eigen::Matrix2d(gt_g(t) * gt_shape_grad(x, y));
  };
  prob.base.pressure = [](double x, double y, double t) {
    double g = gt_g(t);
    return -0.25 * g * g * (std::cos(2.0 * x) + std::cos(2.0 * y));
  };
  // The shape is an eigenfunction of the Laplacian (lap w = -2 w), so
  // u_t - nu lap u = (g' + 2 nu g) w, and the nonlinear + pressure part is 0.
  prob.base.forcing = [nu](double x, double y, double t) {
    Vec2 w = gt_shape(x, y);
    double c = gt_gp(t) + 2.0 * nu * gt_g(t);
    return Vec2{c * w.x, c * w.y};
  };
  prob.base.velocity_t = [](double x, double y, double t) {
    Vec2 w = gt_shape(x, y);
    double gp = gt_gp(t);
    return Vec2{gp * w.x, gp * w.y};
  };
  prob.base.velocity_ttt = [](double x, double y, double t) {
    Vec2 w = gt_shape(x, y);
    double g3 = gt_gppp(t);
    return Vec2{g3 * w.x, g3 * w.y};
  };
  prob.base.velocity_ttt_gradient = [](double x, double y, double t) {
    return Eigen::Matrix2d(gt_gppp(t) * gt_shape_grad(x, y));
  };
  return prob;
}

std::array<double, 3> BeltramiField3D::velocity(double x, double y, double z, double t) const {
  double decay = std::exp(-nu * d * d * t);
  double u1 = -a * (std::exp(a * x) * std::sin(a * y + d * z) +
                    std::exp(a * z) * std::cos(a * x + d * y));
  double u2 = -a * (std::exp(a * y) * std::sin(a * z + d * x) +
                    std::exp(a * x) * std::cos(a * y + d * z));
  double u3 = -a * (std::exp(a * z) * std::sin(a * x + d * y) +
                    std::exp(a * y) * std::cos(a * z + d * x));
  return {u1 * decay, u2 * decay, u3 * decay};
}

double BeltramiField3D::pressure(double x, double y, double z, double t) const {
  double decay = std::exp(-2.0 * nu * d * d * t);
  double s = std::exp(2.0 * a * x) + std::exp(2.0 * a * y) + std::exp(2.0 * a * z) +
             2.0 * std::sin(a * x + d * y) * std::cos(a * z + d * x) * std::exp(a * (y + z)) +
             2.0 * std::sin(a * y + d * z) * std::cos(a * x + d * y) * std::exp(a * (z + x)) +
             2.0 * std::sin(a * z + d * x) * std::cos(a * y + d * z) * std::exp(a * (x + y));
  return -0.5 * a * a * s * decay;
}

BeltramiField3D ethier_steinman(double a, double d, double nu) { return {a, d, nu}; }

}  // namespace ensnse
