#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "ensnse/assembly.hpp"

namespace ensnse {

// Sparse direct LU with fill-reducing column ordering. One factorization is
// reused for any number of right-hand sides; solutions are deterministic for
// a fixed matrix, so factoring the same matrix twice gives bit-identical
// results. Throws on non-square or numerically singular input, naming the
// column where elimination failed.
class Factorization {
 public:
  static Factorization compute(const SpMat& matrix);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  // Column j of the result solves against column j of rhs; identical to J
  // independent solve() calls (same code path per column).
  Eigen::MatrixXd solve_multi(const Eigen::MatrixXd& rhs) const;

  Eigen::Index rows() const { return lu_->rows(); }

 private:
  using Solver = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;
  std::shared_ptr<Solver> lu_;  // shared so Factorization copies are cheap
};

// Same solver, but keeps the symbolic analysis across factorizations of
// matrices with an identical sparsity pattern (the timestepping case: the
// convection values change, the pattern never does).
class PatternReusingSolver {
 public:
  void factorize(const SpMat& matrix);
  bool analyzed() const { return analyzed_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve_multi(const Eigen::MatrixXd& rhs) const;

 private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

}  // namespace ensnse
