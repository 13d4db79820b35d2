#include "core/blocktridiag.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/textio.hpp"

namespace tvef {

BlockTridiagSolver::BlockTridiagSolver(const std::vector<Eigen::MatrixXd>& diag, double mu)
    : mu_(mu) {
  if (diag.empty()) throw NumericError("empty block system");
  T_ = static_cast<int>(diag.size());
  q_ = static_cast<int>(diag.front().rows());
  factors_.reserve(diag.size());
  min_pivot_ = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd schur;
  for (int t = 0; t < T_; ++t) {
    if (diag[t].rows() != q_ || diag[t].cols() != q_) {
      throw NumericError("inconsistent block sizes");
    }
    if (t == 0) {
      schur = diag[t];
    } else {
      // S_t = D_t - mu^2 S_{t-1}^{-1}
      Eigen::MatrixXd prev_inv =
          factors_.back().solve(Eigen::MatrixXd::Identity(q_, q_));
      schur = diag[t] - mu_ * mu_ * prev_inv;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(schur);
    if (llt.info() != Eigen::Success) {
      throw NumericError("normal matrix numerically singular at block " +
                         std::to_string(t + 1) + "; smallest pivot so far " +
                         format_double(std::isfinite(min_pivot_) ? min_pivot_ : 0.0));
    }
    for (int i = 0; i < q_; ++i) {
      double piv = llt.matrixLLT()(i, i);
      min_pivot_ = std::min(min_pivot_, piv * piv);
    }
    factors_.push_back(std::move(llt));
  }
}

Eigen::VectorXd BlockTridiagSolver::solve(const Eigen::VectorXd& b) const {
  if (b.size() != static_cast<Eigen::Index>(T_) * q_) {
    throw NumericError("right-hand side has wrong length");
  }
  // Forward sweep: g_t = b_t + mu S_{t-1}^{-1} g_{t-1}.
  Eigen::MatrixXd g(q_, T_);
  g.col(0) = b.segment(0, q_);
  for (int t = 1; t < T_; ++t) {
    g.col(t) = b.segment(static_cast<Eigen::Index>(t) * q_, q_) +
               mu_ * factors_[t - 1].solve(g.col(t - 1));
  }
  // Backward sweep: x_T = S_T^{-1} g_T; x_t = S_t^{-1} (g_t + mu x_{t+1}).
  Eigen::VectorXd x(static_cast<Eigen::Index>(T_) * q_);
  x.segment(static_cast<Eigen::Index>(T_ - 1) * q_, q_) = factors_[T_ - 1].solve(g.col(T_ - 1));
  for (int t = T_ - 2; t >= 0; --t) {
    Eigen::VectorXd rhs = g.col(t) + mu_ * x.segment(static_cast<Eigen::Index>(t + 1) * q_, q_);
    x.segment(static_cast<Eigen::Index>(t) * q_, q_) = factors_[t].solve(rhs);
  }
  return x;
}

std::vector<Eigen::MatrixXd> BlockTridiagSolver::inverse_diagonal_blocks() const {
  std::vector<Eigen::MatrixXd> c(static_cast<std::size_t>(T_));
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(q_, q_);
  c[static_cast<std::size_t>(T_ - 1)] = factors_[T_ - 1].solve(eye);
  for (int t = T_ - 2; t >= 0; --t) {
    Eigen::MatrixXd sinv = factors_[t].solve(eye);
    c[static_cast<std::size_t>(t)] =
        sinv + mu_ * mu_ * sinv * c[static_cast<std::size_t>(t + 1)] * sinv;
  }
  return c;
}

}  // namespace tvef
