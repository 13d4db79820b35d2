#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tvef {

// Symmetric positive definite block-tridiagonal system with q x q diagonal
// blocks D_1..D_T and constant off-diagonal blocks -mu * I coupling
// consecutive blocks. Factorization is the forward Schur recursion
// S_1 = D_1, S_t = D_t - mu^2 S_{t-1}^{-1}; solves run in O(T q^2) per
// right-hand side and the diagonal blocks of the inverse come from the
// backward recursion C_T = S_T^{-1}, C_t = S_t^{-1} + mu^2 S_t^{-1} C_{t+1} S_t^{-1}.
class BlockTridiagSolver {
 public:
  // Throws NumericError (reporting the smallest pivot) if any Schur
  // complement fails its Cholesky factorization.
  BlockTridiagSolver(const std::vector<Eigen::MatrixXd>& diag, double mu);

  int block_count() const noexcept { return T_; }
  int block_size() const noexcept { return q_; }
  double min_pivot() const noexcept { return min_pivot_; }

  // Solves A x = b for b of length T*q.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  // Diagonal q x q blocks of A^{-1}.
  std::vector<Eigen::MatrixXd> inverse_diagonal_blocks() const;

 private:
  int q_ = 0;
  int T_ = 0;
  double mu_ = 0.0;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
  double min_pivot_ = 0.0;
};

}  // namespace tvef
