#pragma once

#include <vector>

#include "jointspar/common.hpp"

namespace jointspar {

struct BaselineOptions {
  double mu = 0.0;            // initial row-penalty weight; <= 0 lets the
                              // continuation pick max-row-norm(A^T Y)/10
  int max_iter = 5000;        // total inner iterations across all stages
  double rel_tol = 1e-10;     // iterate-change stall threshold (relative)
  double rho = 1.0;           // splitting penalty
  double residual_tol = 1e-8; // continuation target on ||AZ-Y||_F / ||Y||_F
};

void validate(const BaselineOptions& o);

struct BaselineReport {
  bool converged = false;               // residual target reached
  int iterations = 0;                   // inner iterations consumed
  int stages = 0;                       // continuation stages run
  std::vector<double> stage_residuals;  // ||A Z - Y||_F at each stage end
  double final_residual = 0.0;          // ||A Z - Y||_F at the returned Z
};

/// Proximal map of t * (sum of row 2-norms): every row v shrinks to
/// max(0, 1 - t/||v||) * v; rows with ||v|| <= t vanish.
Matrix row_shrink(const Matrix& X, double t);

/// Row-sparse basis pursuit: approximately minimizes the sum of row 2-norms
/// of Z subject to AZ = Y. Operator splitting on the penalized form
/// mu*||Z||_row,1 + 1/2 ||AZ - Y||_F^2 (row_shrink / ridge steps), with mu
/// halved whenever the iterate change stalls below rel_tol, until
/// ||AZ - Y||_F <= residual_tol * ||Y||_F. If the budget runs out first the
/// last iterate is returned and the report is flagged not converged.
Matrix solve_l21(const Matrix& A, const Matrix& Y,
                 const BaselineOptions& opts = {},
                 BaselineReport* report = nullptr);

/// solve_l21 on a reduced right-hand side V (from reduce_problem). Because
/// right-multiplying by a matrix with orthonormal rows preserves row norms,
/// this solves the same row-sparse program as solve_l21(A, Y) in r instead
/// of K columns; lifting the result is the caller's job.
Matrix solve_l21_reduced(const Matrix& A, const Matrix& V,
                         const BaselineOptions& opts = {},
                         BaselineReport* report = nullptr);

/// Single-vector basis pursuit (min ||x||_1 s.t. Ax = y) by a primal-dual
/// iteration independent of the splitting solver above; reference
/// implementation for cross-checking the K=1 case of solve_l21.
Vector solve_l1_bp(const Matrix& A, const Vector& y, int max_iter = 20000,
                   double tol = 1e-12);

}  // namespace jointspar
