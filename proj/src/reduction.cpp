#include "jointspar/reduction.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace jointspar {

namespace {

// Deterministic orientation: flip each singular pair so the largest-magnitude
// entry of the left vector is non-negative (first such entry breaks ties).
void fix_signs(Matrix& left, Matrix& right_rows) {
  for (Index j = 0; j < left.cols(); ++j) {
    Index at = 0;
    left.col(j).cwiseAbs().maxCoeff(&at);
    if (left(at, j) < 0.0) {
      left.col(j) = -left.col(j);
      right_rows.row(j) = -right_rows.row(j);
    }
  }
}

}  // namespace

Index estimate_rank(const Vector& sigma, double rank_tol) {
  require(rank_tol >= 0.0 && std::isfinite(rank_tol),
          "estimate_rank: rank_tol must be finite and non-negative");
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  for (Index i = 0; i + 1 < sigma.size(); ++i)
    require(sigma(i) >= sigma(i + 1) && sigma(i + 1) >= 0.0,
            "estimate_rank: singular values must be non-increasing and non-negative");
  const double cutoff = rank_tol * sigma(0);
  Index r = 0;
  while (r < sigma.size() && sigma(r) > cutoff && sigma(r) > 0.0) ++r;
  return r;
}

SvdFactors compact_svd(const Matrix& Y, double rank_tol, Index max_rank) {
  require(Y.rows() > 0 && Y.cols() > 0, "compact_svd: empty matrix");
  require(rank_tol >= 0.0 && std::isfinite(rank_tol),
          "compact_svd: rank_tol must be finite and non-negative");
  require(Y.allFinite(), "compact_svd: non-finite entry");

  SvdFactors f;
  if (Y.isZero(0.0)) {
    f.left.resize(Y.rows(), 0);
    f.sigma.resize(0);
    f.right_rows.resize(0, Y.cols());
    f.zero_input = true;
    return f;
  }

  Eigen::BDCSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Index r = estimate_rank(svd.singularValues(), rank_tol);
  if (max_rank >= 0 && r > max_rank) r = max_rank;

  f.left = svd.matrixU().leftCols(r);
  f.sigma = svd.singularValues().head(r);
  f.right_rows = svd.matrixV().leftCols(r).transpose();
  fix_signs(f.left, f.right_rows);
  return f;
}

OutputFactors factor_output(const Matrix& Y, double rank_tol, Index max_rank) {
  SvdFactors f = compact_svd(Y, rank_tol, max_rank);
  if (f.rank() == 0)
    throw RankDeficiencyError(
        "factor_output: output matrix has no numerical rank (all-zero or below threshold)",
        0.0);
  OutputFactors out;
  out.V = f.left * f.sigma.asDiagonal();
  out.U = std::move(f.right_rows);
  out.r = f.rank();
  return out;
}

Matrix lift_solution(const Matrix& W, const Matrix& U) {
  require(W.cols() == U.rows(), "lift_solution: inner dimensions disagree");
  return W * U;
}

ReducedProblem reduce_problem(const Matrix& A, const Matrix& Y, double rank_tol,
                              Index max_rank) {
  require(A.rows() == Y.rows(), "reduce_problem: A and Y row counts differ");
  OutputFactors f = factor_output(Y, rank_tol, max_rank);
  ReducedProblem rp;
  rp.A = A;
  rp.V = std::move(f.V);
  rp.U = std::move(f.U);
  rp.r = f.r;
  return rp;
}

}  // namespace jointspar
