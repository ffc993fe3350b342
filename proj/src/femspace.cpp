#include "ensnse/femspace.hpp"

#include <cmath>
#include <stdexcept>

namespace ensnse {

namespace {

// Symmetric triangle rules in barycentric form. Orbits: S3 is the centroid,
// S21(a) the three permutations of (1-2a, a, a), S111(a,b) the six
// permutations of (1-a-b, a, b). Weights are normalized to sum to 1 and are
// scaled by the reference area 1/2 on output.
struct Orbit {
  int kind;  // 3, 21, or 111
  double a = 0.0, b = 0.0;
  double weight;
};

void push_orbit(QuadratureRule& rule, const Orbit& o) {
  auto add = [&rule, &o](double l0, double l1, double l2) {
    rule.points.push_back({l0, l1, l2});
    rule.weights.push_back(0.5 * o.weight);
  };
  if (o.kind == 3) {
    add(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
  } else if (o.kind == 21) {
    double c = 1.0 - 2.0 * o.a;
    add(c, o.a, o.a);
    add(o.a, c, o.a);
    add(o.a, o.a, c);
  } else {
    double c = 1.0 - o.a - o.b;
    add(c, o.a, o.b);
    add(c, o.b, o.a);
    add(o.a, c, o.b);
    add(o.a, o.b, c);
    add(o.b, c, o.a);
    add(o.b, o.a, c);
  }
}

QuadratureRule make_rule(int degree, std::initializer_list<Orbit> orbits) {
  QuadratureRule rule;
  rule.degree = degree;
  for (const auto& o : orbits) push_orbit(rule, o);
  return rule;
}

}  // namespace

QuadratureRule quadrature(int degree) {
  switch (degree) {
    case 1:
      return make_rule(1, {{3, 0, 0, 1.0}});
    case 2:
      return make_rule(2, {{21, 1.0 / 6.0, 0, 1.0 / 3.0}});
    case 3:
      return make_rule(3, {{3, 0, 0, -0.5625}, {21, 0.2, 0, 25.0 / 48.0}});
    case 5:
      return make_rule(5, {{3, 0, 0, 0.225},
                           {21, 0.470142064105115, 0, 0.132394152788506},
                           {21, 0.101286507323456, 0, 0.125939180544827}});
    case 7:
      // 16-point rule, exact through degree 8, all weights positive; also
      // serves the quartic integrands of discrete L4 norms exactly.
      return make_rule(7, {{3, 0, 0, 0.144315607677787},
                           {21, 0.459292588292723, 0, 0.095091634413925},
                           {21, 0.170569307751760, 0, 0.103217370534718},
                           {21, 0.050547228317031, 0, 0.032458497623198},
                           {111, 0.263112829634638, 0.008394777409958, 0.027230314174435}});
    default:
      throw std::invalid_argument("quadrature: supported degrees are 1, 2, 3, 5, 7");
  }
}

std::array<double, 6> p2_values(double l0, double l1, double l2) {
  return {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
          4.0 * l1 * l2, 4.0 * l0 * l2, 4.0 * l0 * l1};
}

std::array<double, 3> p1_values(double l0, double l1, double l2) {
  return {l0, l1, l2};
}

std::array<Eigen::Vector2d, 6> p2_gradients(const TaylorHoodSpace::CellGeometry& geo,
                                            double l0, double l1, double l2) {
  const auto& g = geo.grad_lambda;
  return {(4.0 * l0 - 1.0) * g[0],
          (4.0 * l1 - 1.0) * g[1],
          (4.0 * l2 - 1.0) * g[2],
          4.0 * (l1 * g[2] + l2 * g[1]),
          4.0 * (l0 * g[2] + l2 * g[0]),
          4.0 * (l0 * g[1] + l1 * g[0])};
}

TaylorHoodSpace::TaylorHoodSpace(Mesh mesh) : mesh_(std::move(mesh)) {
  validate(mesh_);
  const int nv = mesh_.n_vertices();
  const int ne = mesh_.n_edges();
  n_scalar_ = nv + ne;

  cell_p2_.resize(mesh_.n_triangles());
  for (int t = 0; t < mesh_.n_triangles(); ++t) {
    const auto& tri = mesh_.triangles[t];
    const auto& te = mesh_.triangle_edges[t];
    cell_p2_[t] = {tri[0], tri[1], tri[2], nv + te[0], nv + te[1], nv + te[2]};
  }

  node_pos_.resize(n_scalar_);
  node_boundary_.assign(n_scalar_, 0);
  for (int v = 0; v < nv; ++v) {
    node_pos_[v] = mesh_.vertices[v];
    node_boundary_[v] = mesh_.vertex_on_boundary[v];
  }
  for (int e = 0; e < ne; ++e) {
    const Vec2& a = mesh_.vertices[mesh_.edges[e][0]];
    const Vec2& b = mesh_.vertices[mesh_.edges[e][1]];
    node_pos_[nv + e] = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    node_boundary_[nv + e] = mesh_.edge_on_boundary[e];
  }

  for (int k = 0; k < n_scalar_; ++k)
    if (node_boundary_[k]) dirichlet_nodes_.push_back(k);
}

TaylorHoodSpace build_space(Mesh mesh) { return TaylorHoodSpace(std::move(mesh)); }

TaylorHoodSpace::CellGeometry TaylorHoodSpace::cell_geometry(int t) const {
  const auto& tri = mesh_.triangles[t];
  const Vec2& p0 = mesh_.vertices[tri[0]];
  const Vec2& p1 = mesh_.vertices[tri[1]];
  const Vec2& p2 = mesh_.vertices[tri[2]];
  double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);

  CellGeometry geo;
  geo.area = 0.5 * det;
  // grad(lambda_i) is the inward normal of the opposite edge over twice the area.
  geo.grad_lambda[0] = Eigen::Vector2d(p1.y - p2.y, p2.x - p1.x) / det;
  geo.grad_lambda[1] = Eigen::Vector2d(p2.y - p0.y, p0.x - p2.x) / det;
  geo.grad_lambda[2] = Eigen::Vector2d(p0.y - p1.y, p1.x - p0.x) / det;
  return geo;
}

CoefficientVector interpolate_velocity(const TaylorHoodSpace& space, const VectorField& f,
                                       double t) {
  const int ns = space.n_scalar();
  CoefficientVector out{Layout::VelocityVector, Eigen::VectorXd(2 * ns)};
  for (int k = 0; k < ns; ++k) {
    Vec2 p = space.node_position(k);
    Vec2 v = f(p.x, p.y, t);
    out.values[k] = v.x;
    out.values[ns + k] = v.y;
  }
  return out;
}

CoefficientVector interpolate_pressure(const TaylorHoodSpace& space, const ScalarField& f,
                                       double t) {
  CoefficientVector out{Layout::Pressure, Eigen::VectorXd(space.n_pressure())};
  for (int v = 0; v < space.n_pressure(); ++v) {
    Vec2 p = space.mesh().vertices[v];
    out.values[v] = f(p.x, p.y, t);
  }
  return out;
}

Vec2 velocity_at(const TaylorHoodSpace& space, const Eigen::VectorXd& u, int t, double l0,
                 double l1, double l2) {
  if (u.size() != space.n_velocity())
    throw std::invalid_argument("velocity_at: coefficient length mismatch");
  const auto phi = p2_values(l0, l1, l2);
  const auto& dofs = space.cell_p2(t);
  const int ns = space.n_scalar();
  Vec2 val{0.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    val.x += phi[i] * u[dofs[i]];
    val.y += phi[i] * u[ns + dofs[i]];
  }
  return val;
}

}  // namespace ensnse
