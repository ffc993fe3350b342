#include "ensnse/linsolve.hpp"

#include <stdexcept>
#include <string>

namespace ensnse {

namespace {

[[noreturn]] void throw_factorization_error(const std::string& stage, const std::string& detail) {
  throw std::runtime_error("linsolve: " + stage + " failed: " +
                           (detail.empty() ? std::string("matrix is singular") : detail));
}

}  // namespace

Factorization Factorization::compute(const SpMat& matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("linsolve: matrix must be square");
  Factorization f;
  f.lu_ = std::make_shared<Solver>();
  f.lu_->analyzePattern(matrix);
  f.lu_->factorize(matrix);
  if (f.lu_->info() != Eigen::Success)
    throw_factorization_error("factorization", f.lu_->lastErrorMessage());
  return f;
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != lu_->rows())
    throw std::invalid_argument("linsolve: rhs length mismatch");
  Eigen::VectorXd x = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success) throw_factorization_error("solve", "");
  return x;
}

Eigen::MatrixXd Factorization::solve_multi(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != lu_->rows())
    throw std::invalid_argument("linsolve: rhs row count mismatch");
  Eigen::MatrixXd x = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success) throw_factorization_error("solve", "");
  return x;
}

void PatternReusingSolver::factorize(const SpMat& matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("linsolve: matrix must be square");
  if (!analyzed_) {
    lu_.analyzePattern(matrix);
    analyzed_ = true;
  }
  lu_.factorize(matrix);
  if (lu_.info() != Eigen::Success)
    throw_factorization_error("factorization", lu_.lastErrorMessage());
}

Eigen::VectorXd PatternReusingSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) throw_factorization_error("solve", "");
  return x;
}

Eigen::MatrixXd PatternReusingSolver::solve_multi(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) throw_factorization_error("solve", "");
  return x;
}

}  // namespace ensnse
