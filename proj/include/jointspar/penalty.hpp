#pragma once

#include <functional>

#include "jointspar/common.hpp"

namespace jointspar {

// Full-rank guard for the orthogonal-factor machinery: sigma_min / sigma_1
// below this ratio is treated as rank collapse and raised as
// RankDeficiencyError rather than silently inverting tiny singular values.
inline constexpr double kRankGuardTol = 1e-10;

struct ObjectiveParams {
  double lambda = 1.0;  // weight on the quadratic data-fit term
  double delta = 1e-3;  // smoothing width for the row-norm penalty
};

void validate(const ObjectiveParams& p);

enum class WeightMode { exact, huber };

/// Q = Z (Z^T Z)^{-1/2}, computed from the thin SVD of Z (never by forming
/// Z^T Z, which would square the condition number). Q has orthonormal columns
/// and shares the row support of Z.
Matrix orthogonal_factor(const Matrix& Z);

/// Sum of row norms of orthogonal_factor(Z). Scale-invariant surrogate for
/// the row support size: equals s when Z spans an s-row-sparse orthonormal
/// basis, and sits in [sqrt(r), sqrt(r*N)] in general.
double exact_penalty(const Matrix& Z);

/// One-sided Huber value: x - delta/2 for x >= delta, x^2/(2 delta) below.
double huber(double x, double delta);

/// Sum over rows of huber(row norm of Q, delta) + delta/2, Q the orthogonal
/// factor. Smooth in Z, upper-bounds exact_penalty, and converges to it as
/// delta -> 0.
double smoothed_penalty(const Matrix& Z, double delta);

/// smoothed_penalty(Z, delta) + (lambda/2) * ||A Z - V||_F^2.
double objective(const Matrix& Z, const Matrix& A, const Matrix& V,
                 const ObjectiveParams& params);

/// Per-row gradient weights. exact: 1/||row|| with 0 on zero rows. huber:
/// min(1/||row||, 1/delta); zero rows get 0 by default, or the continuous
/// limit 1/delta when zero_row_continuous is set.
Vector diag_weights(const Matrix& Q, WeightMode mode, double delta = 0.0,
                    bool zero_row_continuous = false);

/// Gradient of (1/2) ||A Z - V||_F^2, i.e. A^T (A Z - V).
Matrix grad_fidelity(const Matrix& Z, const Matrix& A, const Matrix& V);

/// Euclidean gradient of exact_penalty at full-rank Z: with the thin SVD
/// Z = U S Vt, the gradient is (I - U U^T) diag(w) U S^{-1} Vt where w are the
/// exact-mode weights of the rows of U Vt. Always orthogonal to range(Z).
Matrix grad_exact_penalty(const Matrix& Z);

/// Same structure with the huber-mode weights; smooth everywhere Z has full rank.
Matrix grad_smoothed_penalty(const Matrix& Z, double delta);

/// grad_smoothed_penalty + lambda * grad_fidelity.
Matrix grad_objective(const Matrix& Z, const Matrix& A, const Matrix& V,
                      const ObjectiveParams& params);

/// Central finite differences of f at Z, step h per entry. Verification
/// oracle for the closed-form gradients.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f,
                        const Matrix& Z, double h);

/// Value and gradient of the smoothed penalty from a single SVD; the solver's
/// inner loop lives on this.
struct PenaltyEval {
  double value = 0.0;
  Matrix grad;
};
PenaltyEval eval_smoothed_penalty(const Matrix& Z, double delta);

}  // namespace jointspar
