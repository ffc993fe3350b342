#include <cmath>
#include <doctest.h>
#include <map>
#include <random>

#include "ensnse/analytics.hpp"
#include "ensnse/assembly.hpp"
#include "ensnse/linsolve.hpp"

using namespace ensnse;

namespace {

Eigen::VectorXd random_velocity(const TaylorHoodSpace& space, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd v(space.n_velocity());
  for (int i = 0; i < v.size(); ++i) v[i] = uni(rng);
  return v;
}

VectorField vfield(Vec2 (*f)(double, double)) {
  return [f](double x, double y, double) { return f(x, y); };
}

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("mass matrix: partition of unity, symmetry, positivity") {
  TaylorHoodSpace space = build_space(unit_square_mesh(3));
  SpMat M = assemble_mass(space);
  REQUIRE(M.rows() == space.n_velocity());

  // ones^T M ones integrates |(1,1)|^2 = 2 over the unit square.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(M.rows());
  CHECK(ones.dot(M * ones) == doctest::Approx(2.0).epsilon(1e-12));

  SpMat Mt = SpMat(M.transpose());
  CHECK((M - Mt).norm() <= 1e-14 * M.norm());

  // Component blocks never couple.
  int ns = space.n_scalar();
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      CHECK((it.row() < ns) == (it.col() < ns));

  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd v = random_velocity(space, rng);
    CHECK(v.dot(M * v) > 0.0);
  }
  CHECK(Eigen::VectorXd::Zero(M.rows()).dot(M * Eigen::VectorXd::Zero(M.rows())) == 0.0);
}

TEST_CASE("stiffness matrix: constants in kernel, unit-gradient energy") {
  TaylorHoodSpace space = build_space(unit_square_mesh(3));
  SpMat A = assemble_stiffness(space);

  Eigen::VectorXd rowsum = A * Eigen::VectorXd::Ones(A.cols());
  CHECK(rowsum.lpNorm<Eigen::Infinity>() <= 1e-12);

  Eigen::VectorXd xfield =
      interpolate_velocity(space, vfield([](double x, double) { return Vec2{x, 0.0}; }), 0.0)
          .values;
  CHECK(xfield.dot(A * xfield) == doctest::Approx(1.0).epsilon(1e-12));

  SpMat At = SpMat(A.transpose());
  CHECK((A - At).norm() <= 1e-13 * A.norm());
}

TEST_CASE("divergence block against hand-integrable fields") {
  TaylorHoodSpace space = build_space(unit_square_mesh(3));
  SpMat B = assemble_divergence(space);
  REQUIRE(B.rows() == space.n_pressure());
  REQUIRE(B.cols() == space.n_velocity());

  Eigen::VectorXd c =
      interpolate_velocity(space, vfield([](double, double) { return Vec2{3.0, -2.0}; }), 0.0)
          .values;
  CHECK((B * c).lpNorm<Eigen::Infinity>() <= 1e-12);

  Eigen::VectorXd sol =
      interpolate_velocity(space, vfield([](double x, double y) { return Vec2{x, -y}; }), 0.0)
          .values;
  CHECK((B * sol).lpNorm<Eigen::Infinity>() <= 1e-12);

  Eigen::VectorXd expanding =
      interpolate_velocity(space, vfield([](double x, double y) { return Vec2{x, y}; }), 0.0)
          .values;
  Eigen::VectorXd Bu = B * expanding;
  CHECK(Bu.sum() == doctest::Approx(2.0).epsilon(1e-12));
  // div(x, y) = 2 pointwise, so each entry is 2 * integral of its P1 basis.
  Eigen::VectorXd m = pressure_mean_row(space);
  CHECK((Bu - 2.0 * m).lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("grad-div energy of expanding and solenoidal fields") {
  TaylorHoodSpace space = build_space(unit_square_mesh(3));
  SpMat G = assemble_graddiv(space);

  Eigen::VectorXd c =
      interpolate_velocity(space, vfield([](double, double) { return Vec2{1.0, 1.0}; }), 0.0)
          .values;
  CHECK((G * c).lpNorm<Eigen::Infinity>() <= 1e-13);

  Eigen::VectorXd expanding =
      interpolate_velocity(space, vfield([](double x, double y) { return Vec2{x, y}; }), 0.0)
          .values;
  CHECK(expanding.dot(G * expanding) == doctest::Approx(4.0).epsilon(1e-12));

  Eigen::VectorXd sol =
      interpolate_velocity(space, vfield([](double x, double y) { return Vec2{x, -y}; }), 0.0)
          .values;
  CHECK(sol.dot(G * sol) <= 1e-12);
}

TEST_CASE("convection: skew-symmetry, linearity, and the half-value form") {
  TaylorHoodSpace space = build_space(unit_square_mesh(3));
  std::mt19937 rng(13);

  SpMat N0 = assemble_convection(space, {Layout::VelocityVector,
                                         Eigen::VectorXd::Zero(space.n_velocity())});
  CHECK(N0.norm() == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    CoefficientVector w{Layout::VelocityVector, random_velocity(space, rng)};
    Eigen::VectorXd v = random_velocity(space, rng);
    SpMat N = assemble_convection(space, w);
    CHECK(std::abs(v.dot(N * v)) <= 1e-12 * N.norm() * v.squaredNorm());
    SpMat Nt = SpMat(N.transpose());
    CHECK((N + Nt).norm() <= 1e-12 * N.norm());
  }

  // b*(u, v, w) for u = (1,0), v = (x,0), w = (1,0):
  //   1/2 (u . grad v, w) - 1/2 (u . grad w, v) = 1/2 - 0.
  Eigen::VectorXd u1 =
      interpolate_velocity(space, vfield([](double, double) { return Vec2{1.0, 0.0}; }), 0.0)
          .values;
  Eigen::VectorXd vx =
      interpolate_velocity(space, vfield([](double x, double) { return Vec2{x, 0.0}; }), 0.0)
          .values;
  CHECK(trilinear_form(space, u1, vx, u1) == doctest::Approx(0.5).epsilon(1e-12));

  // Linearity in the convecting field.
  CoefficientVector w1{Layout::VelocityVector, random_velocity(space, rng)};
  CoefficientVector w2{Layout::VelocityVector, random_velocity(space, rng)};
  CoefficientVector mix{Layout::VelocityVector, 0.7 * w1.values - 1.3 * w2.values};
  SpMat Nmix = assemble_convection(space, mix);
  SpMat Nsum = SpMat(0.7 * assemble_convection(space, w1) -
                     1.3 * assemble_convection(space, w2));
  CHECK((Nmix - Nsum).norm() <= 1e-12 * Nmix.norm());

  // Operator action route agrees with the assembled matrix route.
  Eigen::VectorXd b = random_velocity(space, rng);
  Eigen::VectorXd direct = convection_apply(space, w1.values, b);
  Eigen::VectorXd via_matrix = assemble_convection(space, w1) * b;
  CHECK((direct - via_matrix).lpNorm<Eigen::Infinity>() <=
        1e-12 * via_matrix.lpNorm<Eigen::Infinity>());

  CHECK_THROWS(assemble_convection(
      space, {Layout::Pressure, Eigen::VectorXd::Zero(space.n_pressure())}));
  CHECK_THROWS(assemble_convection(
      space, {Layout::VelocityVector, Eigen::VectorXd::Zero(space.n_velocity() - 1)}));
}

TEST_CASE("load vector sums and zero forcing") {
  TaylorHoodSpace space = build_space(unit_square_mesh(3));
  VectorField zero = [](double, double, double) { return Vec2{0.0, 0.0}; };
  CHECK(assemble_load(space, zero, 0.0).norm() == 0.0);

  VectorField ex = [](double, double, double) { return Vec2{1.0, 0.0}; };
  Eigen::VectorXd l = assemble_load(space, ex, 0.0);
  CHECK(l.head(space.n_scalar()).sum() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(l.tail(space.n_scalar()).lpNorm<Eigen::Infinity>() == 0.0);

  Eigen::VectorXd m = pressure_mean_row(space);
  CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-13));
  for (int i = 0; i < m.size(); ++i) CHECK(m[i] > 0.0);
}

TEST_CASE("saddle system solves a manufactured discrete solution") {
  TaylorHoodSpace space = build_space(unit_square_mesh(3));
  const int nu = space.n_velocity(), np = space.n_pressure();
  SpMat M = assemble_mass(space), A = assemble_stiffness(space);
  SpMat F = SpMat(M + A);
  SpMat B = assemble_divergence(space);
  Eigen::VectorXd m = pressure_mean_row(space);

  std::vector<int> constrained;
  for (int k : space.dirichlet_nodes()) {
    constrained.push_back(space.velocity_dof(0, k));
  }
  for (int k : space.dirichlet_nodes()) constrained.push_back(space.velocity_dof(1, k));
  std::sort(constrained.begin(), constrained.end());

  SaddleSystem sys = build_saddle(space, F, B, m, constrained);
  REQUIRE(sys.size() == nu + np + 1);

  // Constrained rows and columns both collapse to identity.
  for (int c : sys.constrained) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(sys.size(), c);
    Eigen::VectorXd col = sys.matrix * e;
    Eigen::VectorXd row = SpMat(sys.matrix.transpose()) * e;
    CHECK((col - e).norm() == 0.0);
    CHECK((row - e).norm() == 0.0);
  }

  // Exact discrete solution: pointwise divergence-free linear velocity and a
  // zero-mean linear pressure (both inside the spaces).
  Eigen::VectorXd ustar =
      interpolate_velocity(
          space, vfield([](double x, double y) { return Vec2{x + y, x - y}; }), 0.0)
          .values;
  Eigen::VectorXd phat =
      interpolate_pressure(
          space, [](double x, double y, double) { return x + y - 1.0; }, 0.0)
          .values;

  Eigen::VectorXd raw = Eigen::VectorXd::Zero(sys.size());
  raw.head(nu) = F * ustar + SpMat(B.transpose()) * phat;
  raw.segment(nu, np) = B * ustar;  // zero up to roundoff
  raw[nu + np] = m.dot(phat);       // zero-mean pressure

  Eigen::VectorXd bv(sys.constrained.size());
  for (std::size_t i = 0; i < sys.constrained.size(); ++i)
    bv[i] = ustar[sys.constrained[i]];

  Eigen::VectorXd rhs = constrained_rhs(sys, raw, bv);
  Factorization f = Factorization::compute(sys.matrix);
  Eigen::VectorXd x = f.solve(rhs);

  CHECK((x.head(nu) - ustar).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK((x.segment(nu, np) - phat).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(std::abs(x[nu + np]) <= 1e-10);
  for (std::size_t i = 0; i < sys.constrained.size(); ++i)
    CHECK(x[sys.constrained[i]] == doctest::Approx(bv[i]).epsilon(1e-12));

  // Map-keyed boundary data must cover the constrained set exactly.
  std::map<int, double> good;
  for (std::size_t i = 0; i < sys.constrained.size(); ++i)
    good[sys.constrained[i]] = bv[i];
  Eigen::VectorXd rhs2 = constrained_rhs(sys, raw, good);
  CHECK((rhs2 - rhs).norm() == 0.0);

  std::map<int, double> missing = good;
  missing.erase(missing.begin());
  CHECK_THROWS(constrained_rhs(sys, raw, missing));
  std::map<int, double> extra = good;
  int interior_dof = -1;
  for (int k = 0; k < space.n_scalar(); ++k)
    if (!space.node_on_boundary(k)) {
      interior_dof = space.velocity_dof(0, k);
      break;
    }
  REQUIRE(interior_dof >= 0);
  extra[interior_dof] = 1.0;
  CHECK_THROWS(constrained_rhs(sys, raw, extra));
}

TEST_CASE("trilinear bound with a constant measured on the coarse mesh") {
  // |b*(u,v,w)| <= (||u||_L4 + C ||div u||_L4) ||grad v|| ||w||_L4 with the
  // smallest C >= 1 that covers 20 random coarse-mesh triples, then checked
  // on a finer mesh.
  std::mt19937 rng(17);
  double c_div = 1.0;
  {
    TaylorHoodSpace coarse = build_space(unit_square_mesh(2));
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd u = random_velocity(coarse, rng);
      Eigen::VectorXd v = random_velocity(coarse, rng);
      Eigen::VectorXd w = random_velocity(coarse, rng);
      double lhs = std::abs(trilinear_form(coarse, u, v, w));
      double base = velocity_l4_norm(coarse, u) * velocity_h1_semi_norm(coarse, v) *
                    velocity_l4_norm(coarse, w);
      double divp = divergence_l4_norm(coarse, u) * velocity_h1_semi_norm(coarse, v) *
                    velocity_l4_norm(coarse, w);
      if (lhs > base && divp > 0.0) c_div = std::max(c_div, (lhs - base) / divp);
    }
  }
  MESSAGE("measured divergence constant: " << c_div);

  TaylorHoodSpace fine = build_space(unit_square_mesh(4));
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd u = random_velocity(fine, rng);
    Eigen::VectorXd v = random_velocity(fine, rng);
    Eigen::VectorXd w = random_velocity(fine, rng);
    double lhs = std::abs(trilinear_form(fine, u, v, w));
    double rhs = (velocity_l4_norm(fine, u) + c_div * divergence_l4_norm(fine, u)) *
                 velocity_h1_semi_norm(fine, v) * velocity_l4_norm(fine, w);
    CHECK(lhs <= rhs);
  }
}

}  // TEST_SUITE
