#pragma once

#include "jointspar/common.hpp"

namespace jointspar {

// Relative singular-value threshold: sigma_i counts toward the rank when
// sigma_i > rank_tol * sigma_1. Double-precision SVD backward error sits
// around 1e-15 * sigma_1, so 1e-8 leaves generous headroom.
inline constexpr double kDefaultRankTol = 1e-8;

/// Thin SVD truncated at the numerical rank: input = left * diag(sigma) * right_rows.
struct SvdFactors {
  Matrix left;        // m x r, orthonormal columns
  Vector sigma;       // length r, positive, non-increasing
  Matrix right_rows;  // r x n, orthonormal rows
  bool zero_input = false;  // r == 0 because the input was identically zero
  Index rank() const { return sigma.size(); }
};

/// Measurement system after replacing Y by its rank-revealing factorization
/// Y ~= V * U: solve A W = V for an N x r unknown, then lift by W * U.
struct ReducedProblem {
  Matrix A;  // M x N
  Matrix V;  // M x r, full column rank
  Matrix U;  // r x K, orthonormal rows
  Index r = 0;
};

/// Output factorization alone (the Y-dependent part of ReducedProblem).
struct OutputFactors {
  Matrix V;  // M x r
  Matrix U;  // r x K
  Index r = 0;
};

/// Thin SVD keeping singular values above rank_tol * sigma_1 (exact zeros are
/// always dropped). Signs are fixed deterministically: the largest-magnitude
/// entry of each left singular vector is made non-negative. max_rank >= 0
/// additionally caps the number of retained triplets.
SvdFactors compact_svd(const Matrix& Y, double rank_tol = kDefaultRankTol,
                       Index max_rank = -1);

/// Numerical rank of a non-increasing, non-negative singular value list.
Index estimate_rank(const Vector& sigma, double rank_tol);

/// Splits Y into V = left * diag(sigma) and U = right_rows, so V U is the
/// rank-r truncation of Y. Throws RankDeficiencyError on zero Y.
OutputFactors factor_output(const Matrix& Y, double rank_tol = kDefaultRankTol,
                            Index max_rank = -1);

/// W * U; rows of the product vanish exactly where rows of W vanish.
Matrix lift_solution(const Matrix& W, const Matrix& U);

/// Bundles A with factor_output(Y).
ReducedProblem reduce_problem(const Matrix& A, const Matrix& Y,
                              double rank_tol = kDefaultRankTol,
                              Index max_rank = -1);

}  // namespace jointspar
