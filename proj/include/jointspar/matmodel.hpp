#pragma once

#include <cstdint>
#include <set>

#include "jointspar/common.hpp"
#include "jointspar/rng.hpp"

namespace jointspar {

// Row norms below 1e-8 times the largest row norm count as zero. The support
// of a recovered matrix is always measured against this relative floor unless
// a caller supplies its own absolute tolerance.
inline constexpr double kSupportRelTol = 1e-8;

/// A generated measurement instance: Y is stored exactly as computed from
/// A * X_true, never regenerated.
struct ProblemInstance {
  Matrix A;       // M x N sensing matrix
  Matrix X_true;  // N x K unknown, exactly s non-zero rows
  Matrix Y;       // M x K output, = A * X_true
  Index s = 0;
  std::uint64_t seed = 0;
};

/// i.i.d. standard normal matrix, filled in row-major order from rng.
Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

/// N x K matrix with exactly s non-zero rows. The support is drawn uniformly
/// without replacement; chosen rows are filled with i.i.d. standard normals
/// (an exactly-zero row would be redrawn, though that event has probability
/// zero in double precision).
Matrix random_row_sparse(Index N, Index K, Index s, Rng& rng);

/// Sum of Euclidean row norms.
double l21_norm(const Matrix& X);

/// Number of rows whose Euclidean norm exceeds tol.
Index l0_rows(const Matrix& X, double tol);

/// Sorted 0-based indices of rows with Euclidean norm above tol.
std::set<Index> row_support(const Matrix& X, double tol);

/// Absolute support tolerance for X: kSupportRelTol times its largest row norm.
double default_support_tol(const Matrix& X);

/// Draws A (M x N) and X_true (N x K, s rows) from one child stream of seed
/// and stores Y = A * X_true.
ProblemInstance make_instance(Index M, Index N, Index K, Index s,
                              std::uint64_t seed);

}  // namespace jointspar
