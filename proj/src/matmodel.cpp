#include "jointspar/matmodel.hpp"

#include <algorithm>
#include <vector>

namespace jointspar {

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  require(rows >= 0 && cols >= 0, "gaussian_matrix: negative dimension");
  Matrix A(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) A(i, j) = rng.normal();
  return A;
}

Matrix random_row_sparse(Index N, Index K, Index s, Rng& rng) {
  require(N >= 0 && K >= 1, "random_row_sparse: need N >= 0, K >= 1");
  require(s >= 0 && s <= N, "random_row_sparse: need 0 <= s <= N");
  // Partial Fisher-Yates: the first s entries of idx are a uniform draw of s
  // distinct rows. Consumes exactly s uniform_below calls.
  std::vector<Index> idx(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < s; ++i) {
    const auto j =
        i + static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(N - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> support(idx.begin(), idx.begin() + s);
  std::sort(support.begin(), support.end());

  Matrix X = Matrix::Zero(N, K);
  for (Index r : support) {
    do {
      for (Index j = 0; j < K; ++j) X(r, j) = rng.normal();
    } while (X.row(r).norm() == 0.0);  // probability-zero guard
  }
  return X;
}

double l21_norm(const Matrix& X) {
  double acc = 0.0;
  for (Index i = 0; i < X.rows(); ++i) acc += X.row(i).norm();
  return acc;
}

Index l0_rows(const Matrix& X, double tol) {
  Index count = 0;
  for (Index i = 0; i < X.rows(); ++i)
    if (X.row(i).norm() > tol) ++count;
  return count;
}

std::set<Index> row_support(const Matrix& X, double tol) {
  std::set<Index> sup;
  for (Index i = 0; i < X.rows(); ++i)
    if (X.row(i).norm() > tol) sup.insert(i);
  return sup;
}

double default_support_tol(const Matrix& X) {
  double max_norm = 0.0;
  for (Index i = 0; i < X.rows(); ++i)
    max_norm = std::max(max_norm, X.row(i).norm());
  return kSupportRelTol * max_norm;
}

ProblemInstance make_instance(Index M, Index N, Index K, Index s,
                              std::uint64_t seed) {
  require(M >= 1 && N >= 1 && K >= 1, "make_instance: dimensions must be positive");
  require(s >= 0 && s <= N, "make_instance: need 0 <= s <= N");
  ProblemInstance inst;
  inst.seed = seed;
  inst.s = s;
  Rng rng_a(Rng::derive(seed, 0));
  Rng rng_x(Rng::derive(seed, 1));
  inst.A = gaussian_matrix(M, N, rng_a);
  inst.X_true = random_row_sparse(N, K, s, rng_x);
  inst.Y = inst.A * inst.X_true;
  require(inst.A.allFinite() && inst.X_true.allFinite() && inst.Y.allFinite(),
          "make_instance: non-finite values generated");
  return inst;
}

}  // namespace jointspar
