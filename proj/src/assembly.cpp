#include "ensnse/assembly.hpp"

#include <algorithm>
#include <stdexcept>

namespace ensnse {

namespace {

using Triplet = Eigen::Triplet<double>;

// Scalar-block assembly loop: accumulates local(i,k) over cells and scatters
// the same block into both velocity components.
template <typename LocalKernel>
SpMat assemble_component_blocks(const TaylorHoodSpace& space, int quad_degree,
                                LocalKernel&& kernel) {
  const QuadratureRule rule = quadrature(quad_degree);
  const int ns = space.n_scalar();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(space.mesh().n_triangles()) * 72);

  Eigen::Matrix<double, 6, 6> local;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto geo = space.cell_geometry(t);
    local.setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = 2.0 * geo.area * rule.weights[q];
      kernel(local, geo, l[0], l[1], l[2], w);
    }
    const auto& dofs = space.cell_p2(t);
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 6; ++k) {
        trips.emplace_back(dofs[i], dofs[k], local(i, k));
        trips.emplace_back(ns + dofs[i], ns + dofs[k], local(i, k));
      }
  }

  SpMat mat(2 * ns, 2 * ns);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return mat;
}

void check_velocity_vector(const TaylorHoodSpace& space, const Eigen::VectorXd& u,
                           const char* who) {
  if (u.size() != space.n_velocity())
    throw std::invalid_argument(std::string(who) + ": velocity coefficient length mismatch");
}

}  // namespace

SpMat assemble_mass(const TaylorHoodSpace& space, int quad_degree) {
  return assemble_component_blocks(
      space, quad_degree,
      [](Eigen::Matrix<double, 6, 6>& local, const TaylorHoodSpace::CellGeometry&, double l0,
         double l1, double l2, double w) {
        const auto phi = p2_values(l0, l1, l2);
        for (int i = 0; i < 6; ++i)
          for (int k = 0; k < 6; ++k) local(i, k) += w * phi[i] * phi[k];
      });
}

SpMat assemble_stiffness(const TaylorHoodSpace& space, int quad_degree) {
  return assemble_component_blocks(
      space, quad_degree,
      [](Eigen::Matrix<double, 6, 6>& local, const TaylorHoodSpace::CellGeometry& geo,
         double l0, double l1, double l2, double w) {
        const auto grad = p2_gradients(geo, l0, l1, l2);
        for (int i = 0; i < 6; ++i)
          for (int k = 0; k < 6; ++k) local(i, k) += w * grad[i].dot(grad[k]);
      });
}

SpMat assemble_divergence(const TaylorHoodSpace& space, int quad_degree) {
  const QuadratureRule rule = quadrature(quad_degree);
  const int ns = space.n_scalar();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(space.mesh().n_triangles()) * 36);

  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto geo = space.cell_geometry(t);
    const auto& p2 = space.cell_p2(t);
    const auto& p1 = space.cell_p1(t);
    Eigen::Matrix<double, 3, 6> bx = Eigen::Matrix<double, 3, 6>::Zero();
    Eigen::Matrix<double, 3, 6> by = Eigen::Matrix<double, 3, 6>::Zero();
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = 2.0 * geo.area * rule.weights[q];
      const auto psi = p1_values(l[0], l[1], l[2]);
      const auto grad = p2_gradients(geo, l[0], l[1], l[2]);
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 6; ++k) {
          bx(i, k) += w * psi[i] * grad[k][0];
          by(i, k) += w * psi[i] * grad[k][1];
        }
    }
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 6; ++k) {
        trips.emplace_back(p1[i], p2[k], bx(i, k));
        trips.emplace_back(p1[i], ns + p2[k], by(i, k));
      }
  }

  SpMat mat(space.n_pressure(), 2 * ns);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return mat;
}

SpMat assemble_graddiv(const TaylorHoodSpace& space, int quad_degree) {
  const QuadratureRule rule = quadrature(quad_degree);
  const int ns = space.n_scalar();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(space.mesh().n_triangles()) * 144);

  // div(basis for dof (c,k)) = d phi_k / d x_c; couples the two blocks.
  Eigen::Matrix<double, 12, 12> local;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto geo = space.cell_geometry(t);
    local.setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = 2.0 * geo.area * rule.weights[q];
      const auto grad = p2_gradients(geo, l[0], l[1], l[2]);
      for (int ci = 0; ci < 2; ++ci)
        for (int i = 0; i < 6; ++i)
          for (int ck = 0; ck < 2; ++ck)
            for (int k = 0; k < 6; ++k)
              local(6 * ci + i, 6 * ck + k) += w * grad[i][ci] * grad[k][ck];
    }
    const auto& dofs = space.cell_p2(t);
    for (int ci = 0; ci < 2; ++ci)
      for (int i = 0; i < 6; ++i)
        for (int ck = 0; ck < 2; ++ck)
          for (int k = 0; k < 6; ++k)
            trips.emplace_back(ci * ns + dofs[i], ck * ns + dofs[k],
                               local(6 * ci + i, 6 * ck + k));
  }

  SpMat mat(2 * ns, 2 * ns);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return mat;
}

SpMat assemble_convection(const TaylorHoodSpace& space, const CoefficientVector& w,
                          int quad_degree) {
  if (w.layout != Layout::VelocityVector)
    throw std::invalid_argument("assemble_convection: convecting field must be a velocity vector");
  check_velocity_vector(space, w.values, "assemble_convection");
  const Eigen::VectorXd& wv = w.values;
  const QuadratureRule rule = quadrature(quad_degree);
  const int ns = space.n_scalar();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(space.mesh().n_triangles()) * 72);

  // N(i,k) = 1/2 (phi_i, w.grad phi_k) - 1/2 (phi_k, w.grad phi_i) per
  // component block; antisymmetric entry by entry, so u^T N u = 0 and the
  // two component blocks are identical.
  Eigen::Matrix<double, 6, 6> local;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto geo = space.cell_geometry(t);
    const auto& dofs = space.cell_p2(t);
    local.setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double wq = 2.0 * geo.area * rule.weights[q];
      const auto phi = p2_values(l[0], l[1], l[2]);
      const auto grad = p2_gradients(geo, l[0], l[1], l[2]);
      Eigen::Vector2d wval = Eigen::Vector2d::Zero();
      for (int i = 0; i < 6; ++i) {
        wval[0] += phi[i] * wv[dofs[i]];
        wval[1] += phi[i] * wv[ns + dofs[i]];
      }
      std::array<double, 6> wdg;  // (w.grad) phi_k
      for (int k = 0; k < 6; ++k) wdg[k] = wval.dot(grad[k]);
      for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 6; ++k)
          local(i, k) += wq * 0.5 * (phi[i] * wdg[k] - phi[k] * wdg[i]);
    }
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 6; ++k) {
        trips.emplace_back(dofs[i], dofs[k], local(i, k));
        trips.emplace_back(ns + dofs[i], ns + dofs[k], local(i, k));
      }
  }

  SpMat mat(2 * ns, 2 * ns);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return mat;
}

Eigen::VectorXd convection_apply(const TaylorHoodSpace& space, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& b, int quad_degree) {
  check_velocity_vector(space, a, "convection_apply");
  check_velocity_vector(space, b, "convection_apply");
  const QuadratureRule rule = quadrature(quad_degree);
  const int ns = space.n_scalar();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * ns);

  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto geo = space.cell_geometry(t);
    const auto& dofs = space.cell_p2(t);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = 2.0 * geo.area * rule.weights[q];
      const auto phi = p2_values(l[0], l[1], l[2]);
      const auto grad = p2_gradients(geo, l[0], l[1], l[2]);

      Eigen::Vector2d av = Eigen::Vector2d::Zero();
      Eigen::Vector2d bv = Eigen::Vector2d::Zero();
      Eigen::Matrix2d bg = Eigen::Matrix2d::Zero();  // bg(r,c) = d b_r / d x_c
      for (int i = 0; i < 6; ++i) {
        double cx = b[dofs[i]], cy = b[ns + dofs[i]];
        av[0] += phi[i] * a[dofs[i]];
        av[1] += phi[i] * a[ns + dofs[i]];
        bv[0] += phi[i] * cx;
        bv[1] += phi[i] * cy;
        bg.row(0) += cx * grad[i].transpose();
        bg.row(1) += cy * grad[i].transpose();
      }
      Eigen::Vector2d adgb = bg * av;  // (a.grad) b
      for (int i = 0; i < 6; ++i) {
        double adgphi = av.dot(grad[i]);  // (a.grad) phi_i
        // b*(a, b, phi_i e_c) = 1/2 (a.grad b)_c phi_i - 1/2 (a.grad phi_i) b_c
        r[dofs[i]] += w * 0.5 * (adgb[0] * phi[i] - adgphi * bv[0]);
        r[ns + dofs[i]] += w * 0.5 * (adgb[1] * phi[i] - adgphi * bv[1]);
      }
    }
  }
  return r;
}

double trilinear_form(const TaylorHoodSpace& space, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& c, int quad_degree) {
  check_velocity_vector(space, c, "trilinear_form");
  return c.dot(convection_apply(space, a, b, quad_degree));
}

Eigen::VectorXd assemble_load(const TaylorHoodSpace& space, const VectorField& f, double t,
                              int quad_degree) {
  const QuadratureRule rule = quadrature(quad_degree);
  const int ns = space.n_scalar();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(2 * ns);

  for (int tr = 0; tr < space.mesh().n_triangles(); ++tr) {
    const auto geo = space.cell_geometry(tr);
    const auto& tri = space.mesh().triangles[tr];
    const Vec2& p0 = space.mesh().vertices[tri[0]];
    const Vec2& p1 = space.mesh().vertices[tri[1]];
    const Vec2& p2 = space.mesh().vertices[tri[2]];
    const auto& dofs = space.cell_p2(tr);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = 2.0 * geo.area * rule.weights[q];
      double x = l[0] * p0.x + l[1] * p1.x + l[2] * p2.x;
      double y = l[0] * p0.y + l[1] * p1.y + l[2] * p2.y;
      Vec2 fv = f(x, y, t);
      const auto phi = p2_values(l[0], l[1], l[2]);
      for (int i = 0; i < 6; ++i) {
        load[dofs[i]] += w * phi[i] * fv.x;
        load[ns + dofs[i]] += w * phi[i] * fv.y;
      }
    }
  }
  return load;
}

Eigen::VectorXd pressure_mean_row(const TaylorHoodSpace& space, int quad_degree) {
  const QuadratureRule rule = quadrature(quad_degree);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(space.n_pressure());
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto geo = space.cell_geometry(t);
    const auto& p1 = space.cell_p1(t);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      double w = 2.0 * geo.area * rule.weights[q];
      const auto psi = p1_values(l[0], l[1], l[2]);
      for (int i = 0; i < 3; ++i) m[p1[i]] += w * psi[i];
    }
  }
  return m;
}

SaddleSystem build_saddle(const TaylorHoodSpace& space, const SpMat& velocity_block,
                          const SpMat& divergence, const Eigen::VectorXd& mean_row,
                          const std::vector<int>& constrained_velocity_dofs) {
  const int nu = space.n_velocity();
  const int np = space.n_pressure();
  if (velocity_block.rows() != nu || velocity_block.cols() != nu)
    throw std::invalid_argument("build_saddle: velocity block size mismatch");
  if (divergence.rows() != np || divergence.cols() != nu)
    throw std::invalid_argument("build_saddle: divergence block size mismatch");
  if (mean_row.size() != np)
    throw std::invalid_argument("build_saddle: mean row size mismatch");

  SaddleSystem sys;
  sys.n_velocity = nu;
  sys.n_pressure = np;
  sys.constrained = constrained_velocity_dofs;
  std::sort(sys.constrained.begin(), sys.constrained.end());
  for (int d : sys.constrained)
    if (d < 0 || d >= nu)
      throw std::invalid_argument("build_saddle: constrained dof out of range");

  std::vector<char> is_constrained(nu, 0);
  for (int d : sys.constrained) is_constrained[d] = 1;
  std::vector<int> constrained_slot(nu, -1);
  for (std::size_t s = 0; s < sys.constrained.size(); ++s)
    constrained_slot[sys.constrained[s]] = static_cast<int>(s);

  const int n = nu + np + 1;
  std::vector<Triplet> trips;
  std::vector<Triplet> lift_trips;
  trips.reserve(static_cast<std::size_t>(velocity_block.nonZeros()) +
                2 * divergence.nonZeros() + 2 * np + sys.constrained.size());

  auto emit = [&](int row, int col, double v) {
    // Constrained velocity rows become identity rows; constrained columns
    // move to the lift so the factored matrix is value independent.
    bool rc = row < nu && is_constrained[row];
    bool cc = col < nu && is_constrained[col];
    if (rc) return;
    if (cc) {
      lift_trips.emplace_back(row, constrained_slot[col], v);
      return;
    }
    trips.emplace_back(row, col, v);
  };

  for (int k = 0; k < velocity_block.outerSize(); ++k)
    for (SpMat::InnerIterator it(velocity_block, k); it; ++it)
      emit(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < divergence.outerSize(); ++k)
    for (SpMat::InnerIterator it(divergence, k); it; ++it) {
      emit(nu + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());   // B
      emit(static_cast<int>(it.col()), nu + static_cast<int>(it.row()), it.value());   // B^T
    }
  for (int i = 0; i < np; ++i) {
    emit(nu + i, nu + np, mean_row[i]);  // m^T column
    emit(nu + np, nu + i, mean_row[i]);  // m row
  }
  for (int d : sys.constrained) trips.emplace_back(d, d, 1.0);

  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  sys.matrix.makeCompressed();
  sys.lift.resize(n, static_cast<int>(sys.constrained.size()));
  sys.lift.setFromTriplets(lift_trips.begin(), lift_trips.end());
  sys.lift.makeCompressed();
  return sys;
}

Eigen::VectorXd constrained_rhs(const SaddleSystem& system, const Eigen::VectorXd& raw_rhs,
                                const Eigen::VectorXd& boundary_values) {
  if (raw_rhs.size() != system.size())
    throw std::invalid_argument("constrained_rhs: rhs size mismatch");
  if (boundary_values.size() != static_cast<Eigen::Index>(system.constrained.size()))
    throw std::invalid_argument("constrained_rhs: boundary value count mismatch");

  Eigen::VectorXd rhs = raw_rhs - system.lift * boundary_values;
  for (std::size_t s = 0; s < system.constrained.size(); ++s)
    rhs[system.constrained[s]] = boundary_values[static_cast<Eigen::Index>(s)];
  return rhs;
}

Eigen::VectorXd constrained_rhs(const SaddleSystem& system, const Eigen::VectorXd& raw_rhs,
                                const std::map<int, double>& boundary_values) {
  if (boundary_values.size() != system.constrained.size())
    throw std::invalid_argument("constrained_rhs: boundary values must cover the constrained set");
  Eigen::VectorXd bv(static_cast<Eigen::Index>(system.constrained.size()));
  for (std::size_t s = 0; s < system.constrained.size(); ++s) {
    auto it = boundary_values.find(system.constrained[s]);
    if (it == boundary_values.end())
      throw std::invalid_argument("constrained_rhs: missing value for a constrained dof");
    bv[static_cast<Eigen::Index>(s)] = it->second;
  }
  return constrained_rhs(system, raw_rhs, bv);
}

}  // namespace ensnse
