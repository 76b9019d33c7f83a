#pragma once

#include <set>

#include "jointspar/common.hpp"

namespace jointspar {

// Exhaustive-search size caps: larger inputs throw SizeLimitError rather
// than silently approximating (worst case stays under ~3M subset solves).
constexpr int kSparkMaxCols = 24;
constexpr int kBruteForceMaxCols = 24;
constexpr int kBruteForceMaxSparsity = 6;

// Relative singular-value threshold declaring a column subset dependent.
constexpr double kSparkTol = 1e-10;

/// Smallest number of linearly dependent columns of A (subset judged
/// dependent when sigma_min <= kSparkTol * sigma_1); N+1 when every subset
/// is independent (full column rank). Subsets larger than rank(A) are
/// dependent without testing, so enumeration stops at rank(A)+1.
int spark(const Matrix& A, int max_cols = kSparkMaxCols);

/// Largest s for which s-row-sparse rank-r solutions are uniquely
/// determined by their measurements: floor((spark - 1 + r) / 2).
int max_recoverable_sparsity(int spark, int r);

enum class BruteForceStatus { found, ambiguous, not_found };

const char* to_string(BruteForceStatus s);

struct BruteForceResult {
  BruteForceStatus status = BruteForceStatus::not_found;
  Matrix W;                 // N x r, zero outside support; empty when not_found
  std::set<Index> support;  // lexicographically smallest fitting support
  double residual = 0.0;    // ||A_S W_S - V||_F at the returned support
};

/// Exhaustive row-sparse solve of A W = V: enumerates supports by increasing
/// size (lexicographic within a size); the first size with a support whose
/// least-squares residual is <= fit_tol * ||V||_F wins. If several supports
/// of that size fit with numerically distinct solutions, the status is
/// ambiguous (uniqueness violated) and the lexicographically smallest one is
/// still returned. V = 0 resolves to the empty support and W = 0.
BruteForceResult brute_force_l0(const Matrix& A, const Matrix& V, int s_max,
                                double fit_tol = 1e-10);

/// True iff numerical rank(X) == numerical rank(A*X) at tolerance tol
/// (relative to each spectrum's largest singular value).
bool rank_preservation_check(const Matrix& A, const Matrix& X,
                             double tol = 1e-8);

struct RecoveryReport {
  double rel_error = 0.0;      // ||X_hat - X_true||_F / ||X_true||_F
  bool support_match = false;  // row supports equal at the tolerance
  bool success = false;        // rel_error < success_tol
};

/// Judges a recovery attempt. support_tol <= 0 selects
/// default_support_tol(X_true) for both supports. Throws on X_true = 0.
RecoveryReport recovery_report(const Matrix& X_hat, const Matrix& X_true,
                               double success_tol = 1e-3,
                               double support_tol = -1.0);

}  // namespace jointspar
