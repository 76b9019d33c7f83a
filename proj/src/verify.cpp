#include "jointspar/verify.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <string>
#include <vector>

#include "jointspar/matmodel.hpp"
#include "jointspar/reduction.hpp"

namespace jointspar {

namespace {

// Lexicographic j-subset enumeration over {0, ..., n-1}.
bool next_combination(std::vector<int>& c, int n) {
  const int j = static_cast<int>(c.size());
  for (int i = j - 1; i >= 0; --i) {
    if (c[i] < n - j + i) {
      ++c[i];
      for (int t = i + 1; t < j; ++t) c[t] = c[t - 1] + 1;
      return true;
    }
  }
  return false;
}

Matrix take_columns(const Matrix& A, const std::vector<int>& idx) {
  Matrix S(A.rows(), static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) S.col(static_cast<Index>(i)) = A.col(idx[i]);
  return S;
}

bool columns_dependent(const Matrix& S) {
  Eigen::JacobiSVD<Matrix> svd(S);
  const Vector& sig = svd.singularValues();
  return sig(sig.size() - 1) <= kSparkTol * sig(0);
}

Index numerical_rank(const Matrix& X, double tol) {
  if (X.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(X);
  return estimate_rank(svd.singularValues(), tol);
}

}  // namespace

int spark(const Matrix& A, int max_cols) {
  const Index N = A.cols();
  require(N >= 1 && A.rows() >= 1, "spark: empty matrix");
  require(A.allFinite(), "spark: non-finite entries");
  if (N > max_cols)
    throw SizeLimitError("spark: " + std::to_string(N) + " columns exceeds the exhaustive bound " +
                         std::to_string(max_cols));

  const Index rank = numerical_rank(A, kSparkTol);
  for (int j = 1; j <= static_cast<int>(std::min<Index>(N, rank + 1)); ++j) {
    if (j == static_cast<int>(rank) + 1) return j;  // any rank+1 columns are dependent
    std::vector<int> c(j);
    for (int i = 0; i < j; ++i) c[i] = i;
    do {
      if (columns_dependent(take_columns(A, c))) return j;
    } while (next_combination(c, static_cast<int>(N)));
  }
  return static_cast<int>(N) + 1;  // full column rank: no dependent subset
}

int max_recoverable_sparsity(int spark, int r) {
  require(spark >= 2, "max_recoverable_sparsity: spark must be >= 2");
  require(r >= 1, "max_recoverable_sparsity: r must be >= 1");
  return (spark - 1 + r) / 2;
}

const char* to_string(BruteForceStatus s) {
  switch (s) {
    case BruteForceStatus::found: return "found";
    case BruteForceStatus::ambiguous: return "ambiguous";
    case BruteForceStatus::not_found: return "not_found";
  }
  return "unknown";
}

BruteForceResult brute_force_l0(const Matrix& A, const Matrix& V, int s_max,
                                double fit_tol) {
  const Index N = A.cols(), r = V.cols();
  require(A.rows() == V.rows(), "brute_force_l0: A and V row counts differ");
  require(N >= 1 && r >= 1, "brute_force_l0: empty input");
  require(A.allFinite() && V.allFinite(), "brute_force_l0: non-finite input");
  require(std::isfinite(fit_tol) && fit_tol > 0.0,
          "brute_force_l0: fit_tol must be positive");
  require(s_max >= 0, "brute_force_l0: s_max must be >= 0");
  if (N > kBruteForceMaxCols)
    throw SizeLimitError("brute_force_l0: " + std::to_string(N) +
                         " columns exceeds the exhaustive bound " +
                         std::to_string(kBruteForceMaxCols));
  if (s_max > kBruteForceMaxSparsity)
    throw SizeLimitError("brute_force_l0: s_max " + std::to_string(s_max) +
                         " exceeds the exhaustive bound " +
                         std::to_string(kBruteForceMaxSparsity));

  BruteForceResult out;
  const double vnorm = V.norm();
  if (vnorm == 0.0) {
    out.status = BruteForceStatus::found;
    out.W = Matrix::Zero(N, r);
    return out;
  }

  constexpr double kDistinctTol = 1e-8;  // solutions closer than this are one
  for (int j = 1; j <= std::min<int>(s_max, static_cast<int>(N)); ++j) {
    bool have_first = false;
    Matrix W_first;
    std::set<Index> support_first;
    double residual_first = 0.0;
    bool distinct = false;
    std::vector<int> c(j);
    for (int i = 0; i < j; ++i) c[i] = i;
    do {
      const Matrix A_S = take_columns(A, c);
      const Matrix W_S = A_S.colPivHouseholderQr().solve(V);
      const double res = (A_S * W_S - V).norm();
      if (res <= fit_tol * vnorm) {
        Matrix W_full = Matrix::Zero(N, r);
        for (int i = 0; i < j; ++i) W_full.row(c[i]) = W_S.row(i);
        if (!have_first) {
          have_first = true;
          W_first = W_full;
          support_first.clear();
          for (int i = 0; i < j; ++i) support_first.insert(c[i]);
          residual_first = res;
        } else if ((W_full - W_first).norm() >
                   kDistinctTol * std::max(1.0, W_first.norm())) {
          distinct = true;
        }
      }
    } while (next_combination(c, static_cast<int>(N)));
    if (have_first) {
      out.status = distinct ? BruteForceStatus::ambiguous : BruteForceStatus::found;
      out.W = std::move(W_first);
      out.support = std::move(support_first);
      out.residual = residual_first;
      return out;
    }
  }
  return out;  // not_found
}

bool rank_preservation_check(const Matrix& A, const Matrix& X, double tol) {
  require(A.cols() == X.rows(), "rank_preservation_check: shape mismatch");
  require(std::isfinite(tol) && tol > 0.0,
          "rank_preservation_check: tol must be positive");
  return numerical_rank(X, tol) == numerical_rank(A * X, tol);
}

RecoveryReport recovery_report(const Matrix& X_hat, const Matrix& X_true,
                               double success_tol, double support_tol) {
  require(X_hat.rows() == X_true.rows() && X_hat.cols() == X_true.cols(),
          "recovery_report: shape mismatch");
  require(std::isfinite(success_tol) && success_tol > 0.0,
          "recovery_report: success_tol must be positive");
  const double tnorm = X_true.norm();
  require(tnorm > 0.0, "recovery_report: X_true is zero");
  RecoveryReport rep;
  rep.rel_error = (X_hat - X_true).norm() / tnorm;
  const double tol = support_tol > 0.0 ? support_tol : default_support_tol(X_true);
  rep.support_match = row_support(X_hat, tol) == row_support(X_true, tol);
  rep.success = rep.rel_error < success_tol;
  return rep;
}

}  // namespace jointspar
