#include "jointspar/penalty.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace jointspar {

void validate(const ObjectiveParams& p) {
  require(std::isfinite(p.lambda) && p.lambda > 0.0,
          "ObjectiveParams: lambda must be positive and finite");
  require(std::isfinite(p.delta) && p.delta > 0.0,
          "ObjectiveParams: delta must be positive and finite");
}

namespace {

struct ThinSvd {
  Matrix U;     // N x r, orthonormal columns
  Vector sigma; // r, positive
  Matrix Vt;    // r x r, orthogonal
};

ThinSvd guarded_svd(const Matrix& Z, const char* who) {
  require(Z.rows() > 0 && Z.cols() > 0, std::string(who) + ": empty matrix");
  require(Z.allFinite(), std::string(who) + ": non-finite entry");
  if (Z.rows() < Z.cols())
    throw RankDeficiencyError(
        std::string(who) + ": fewer rows than columns, rank must fall short", 0.0);
  Eigen::BDCSVD<Matrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double ratio = s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
  if (!(ratio >= kRankGuardTol))
    throw RankDeficiencyError(
        std::string(who) + ": rank-deficient input (sigma_min/sigma_1 = " +
            std::to_string(ratio) + ")",
        ratio);
  return {svd.matrixU(), s, svd.matrixV().transpose()};
}

double huber_unchecked(double x, double delta) {
  return x >= delta ? x - 0.5 * delta : x * x / (2.0 * delta);
}

}  // namespace

Matrix orthogonal_factor(const Matrix& Z) {
  ThinSvd f = guarded_svd(Z, "orthogonal_factor");
  return f.U * f.Vt;
}

double exact_penalty(const Matrix& Z) {
  Matrix Q = orthogonal_factor(Z);
  double acc = 0.0;
  for (Index i = 0; i < Q.rows(); ++i) acc += Q.row(i).norm();
  return acc;
}

double huber(double x, double delta) {
  require(x >= 0.0, "huber: argument must be non-negative");
  require(std::isfinite(delta) && delta > 0.0, "huber: delta must be positive");
  return huber_unchecked(x, delta);
}

double smoothed_penalty(const Matrix& Z, double delta) {
  require(std::isfinite(delta) && delta > 0.0,
          "smoothed_penalty: delta must be positive");
  ThinSvd f = guarded_svd(Z, "smoothed_penalty");
  Matrix Q = f.U * f.Vt;
  double acc = 0.0;
  for (Index i = 0; i < Q.rows(); ++i)
    acc += huber_unchecked(Q.row(i).norm(), delta) + 0.5 * delta;
  return acc;
}

double objective(const Matrix& Z, const Matrix& A, const Matrix& V,
                 const ObjectiveParams& params) {
  validate(params);
  require(A.cols() == Z.rows() && A.rows() == V.rows() && Z.cols() == V.cols(),
          "objective: shape mismatch");
  const double fit = (A * Z - V).squaredNorm();
  return smoothed_penalty(Z, params.delta) + 0.5 * params.lambda * fit;
}

Vector diag_weights(const Matrix& Q, WeightMode mode, double delta,
                    bool zero_row_continuous) {
  if (mode == WeightMode::huber)
    require(std::isfinite(delta) && delta > 0.0,
            "diag_weights: huber mode needs delta > 0");
  Vector w(Q.rows());
  for (Index i = 0; i < Q.rows(); ++i) {
    const double n = Q.row(i).norm();
    if (n == 0.0) {
      w(i) = (mode == WeightMode::huber && zero_row_continuous) ? 1.0 / delta : 0.0;
    } else if (mode == WeightMode::exact) {
      w(i) = 1.0 / n;
    } else {
      w(i) = std::min(1.0 / n, 1.0 / delta);
    }
  }
  return w;
}

Matrix grad_fidelity(const Matrix& Z, const Matrix& A, const Matrix& V) {
  require(A.cols() == Z.rows() && A.rows() == V.rows() && Z.cols() == V.cols(),
          "grad_fidelity: shape mismatch");
  return A.transpose() * (A * Z - V);
}

namespace {

// Shared assembly for both penalty gradients: weights on the rows of U Vt,
// then project diag(w) U S^{-1} Vt off the range of Z.
Matrix penalty_grad_from_svd(const ThinSvd& f, const Vector& w) {
  Matrix T = w.asDiagonal() * (f.U * (f.sigma.cwiseInverse().asDiagonal() * f.Vt));
  return T - f.U * (f.U.transpose() * T);
}

}  // namespace

Matrix grad_exact_penalty(const Matrix& Z) {
  ThinSvd f = guarded_svd(Z, "grad_exact_penalty");
  Matrix Q = f.U * f.Vt;
  return penalty_grad_from_svd(f, diag_weights(Q, WeightMode::exact));
}

Matrix grad_smoothed_penalty(const Matrix& Z, double delta) {
  require(std::isfinite(delta) && delta > 0.0,
          "grad_smoothed_penalty: delta must be positive");
  ThinSvd f = guarded_svd(Z, "grad_smoothed_penalty");
  Matrix Q = f.U * f.Vt;
  return penalty_grad_from_svd(f, diag_weights(Q, WeightMode::huber, delta));
}

Matrix grad_objective(const Matrix& Z, const Matrix& A, const Matrix& V,
                      const ObjectiveParams& params) {
  validate(params);
  return grad_smoothed_penalty(Z, params.delta) +
         params.lambda * grad_fidelity(Z, A, V);
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f,
                        const Matrix& Z, double h) {
  require(std::isfinite(h) && h > 0.0, "finite_diff_grad: h must be positive");
  Matrix G(Z.rows(), Z.cols());
  Matrix P = Z;
  for (Index i = 0; i < Z.rows(); ++i)
    for (Index j = 0; j < Z.cols(); ++j) {
      const double z = Z(i, j);
      P(i, j) = z + h;
      const double fp = f(P);
      P(i, j) = z - h;
      const double fm = f(P);
      P(i, j) = z;
      G(i, j) = (fp - fm) / (2.0 * h);
    }
  return G;
}

PenaltyEval eval_smoothed_penalty(const Matrix& Z, double delta) {
  require(std::isfinite(delta) && delta > 0.0,
          "eval_smoothed_penalty: delta must be positive");
  ThinSvd f = guarded_svd(Z, "eval_smoothed_penalty");
  Matrix Q = f.U * f.Vt;
  PenaltyEval out;
  Vector w(Q.rows());
  for (Index i = 0; i < Q.rows(); ++i) {
    const double n = Q.row(i).norm();
    out.value += huber_unchecked(n, delta) + 0.5 * delta;
    w(i) = n == 0.0 ? 0.0 : std::min(1.0 / n, 1.0 / delta);
  }
  out.grad = penalty_grad_from_svd(f, w);
  return out;
}

}  // namespace jointspar
