#include "jointspar/l21base.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace jointspar {

void validate(const BaselineOptions& o) {
  require(o.max_iter >= 1, "BaselineOptions: max_iter must be >= 1");
  require(std::isfinite(o.rel_tol) && o.rel_tol > 0.0,
          "BaselineOptions: rel_tol must be positive");
  require(std::isfinite(o.rho) && o.rho > 0.0,
          "BaselineOptions: rho must be positive");
  require(std::isfinite(o.residual_tol) && o.residual_tol > 0.0,
          "BaselineOptions: residual_tol must be positive");
}

Matrix row_shrink(const Matrix& X, double t) {
  require(std::isfinite(t) && t >= 0.0, "row_shrink: t must be >= 0");
  Matrix Z = X;
  if (t == 0.0) return Z;
  for (Index n = 0; n < Z.rows(); ++n) {
    const double nr = Z.row(n).norm();
    if (nr <= t)
      Z.row(n).setZero();
    else
      Z.row(n) *= 1.0 - t / nr;
  }
  return Z;
}

Matrix solve_l21(const Matrix& A, const Matrix& Y, const BaselineOptions& opts,
                 BaselineReport* report) {
  validate(opts);
  require(A.rows() == Y.rows(), "solve_l21: A and Y row counts differ");
  require(A.rows() >= 1 && A.cols() >= 1 && Y.cols() >= 1,
          "solve_l21: empty input");
  require(A.allFinite() && Y.allFinite(), "solve_l21: non-finite input");

  const Index M = A.rows(), N = A.cols(), K = Y.cols();
  BaselineReport rep;
  const double ynorm = Y.norm();
  if (ynorm == 0.0) {
    rep.converged = true;
    if (report) *report = rep;
    return Matrix::Zero(N, K);
  }

  const double rho = opts.rho;
  const Matrix AtY = A.transpose() * Y;
  double mu_max = 0.0;
  for (Index n = 0; n < N; ++n) mu_max = std::max(mu_max, AtY.row(n).norm());
  double mu = opts.mu > 0.0 ? opts.mu : mu_max / 10.0;

  // ridge step (A^T A + rho I)^{-1} applied through the M x M Gram form
  Eigen::LLT<Matrix> llt(A * A.transpose() + rho * Matrix::Identity(M, M));
  require(llt.info() == Eigen::Success, "solve_l21: Gram factorization failed");
  auto ridge = [&](const Matrix& B) -> Matrix {
    return (B - A.transpose() * llt.solve(A * B)) / rho;
  };

  Matrix Z = Matrix::Zero(N, K);
  Matrix U = Matrix::Zero(N, K);
  Matrix X = Matrix::Zero(N, K);
  const double target = opts.residual_tol * ynorm;
  // Intermediate stages only need enough accuracy to warm-start the next mu;
  // once the residual target is in reach the final stage polishes to rel_tol.
  const double stage_tol = std::max(opts.rel_tol, 1e-5);
  bool polishing = false;
  // Advancing on an iterate-change stall alone can snapshot a transient; the
  // residual guard keeps the recorded stage residuals non-increasing (the
  // mu-path fixed points have non-increasing residuals, so waiting is safe).
  double last_stage_res = std::numeric_limits<double>::infinity();

  while (rep.iterations < opts.max_iter) {
    const Matrix Z_prev = Z;
    X = ridge(AtY + rho * (Z - U));
    Z = row_shrink(X + U, mu / rho);
    U += X - Z;
    ++rep.iterations;

    const double change = (Z - Z_prev).norm();
    const double scale = std::max(1.0, Z.norm());
    if (polishing) {
      if (change <= opts.rel_tol * scale) {
        rep.stage_residuals.push_back((A * Z - Y).norm());
        ++rep.stages;
        rep.converged = true;
        break;
      }
      continue;
    }
    if (change <= stage_tol * scale) {
      const double res = (A * Z - Y).norm();
      if (res > last_stage_res * (1.0 + 1e-9)) continue;
      if (res <= target) {
        if (stage_tol == opts.rel_tol) {
          rep.stage_residuals.push_back(res);
          ++rep.stages;
          rep.converged = true;
          break;
        }
        polishing = true;  // hold mu, tighten to rel_tol
        continue;
      }
      rep.stage_residuals.push_back(res);
      ++rep.stages;
      last_stage_res = res;
      if (mu < 1e-16 * std::max(mu_max, 1.0)) break;  // no progress possible
      mu *= 0.5;
    }
  }

  rep.final_residual = (A * Z - Y).norm();
  if (!rep.converged) rep.converged = rep.final_residual <= target;
  if (report) *report = rep;
  return Z;
}

Matrix solve_l21_reduced(const Matrix& A, const Matrix& V,
                         const BaselineOptions& opts, BaselineReport* report) {
  return solve_l21(A, V, opts, report);
}

Vector solve_l1_bp(const Matrix& A, const Vector& y, int max_iter, double tol) {
  require(A.rows() == y.size(), "solve_l1_bp: shape mismatch");
  require(max_iter >= 1 && tol > 0.0, "solve_l1_bp: bad iteration budget");
  // primal-dual (Chambolle-Pock) on min ||x||_1 s.t. Ax = y:
  // dual ascent on the constraint, entrywise soft threshold on the primal
  const double opnorm = Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
  require(opnorm > 0.0, "solve_l1_bp: zero operator");
  const double tau = 0.95 / opnorm, sigma = 0.95 / opnorm;
  Vector x = Vector::Zero(A.cols()), x_bar = x, p = Vector::Zero(A.rows());
  for (int it = 0; it < max_iter; ++it) {
    p += sigma * (A * x_bar - y);
    Vector g = x - tau * (A.transpose() * p);
    Vector x_new(g.size());
    for (Index i = 0; i < g.size(); ++i) {
      const double v = g(i);
      x_new(i) = v > tau ? v - tau : (v < -tau ? v + tau : 0.0);
    }
    x_bar = 2.0 * x_new - x;
    const double change = (x_new - x).norm();
    x = x_new;
    if (change <= tol * std::max(1.0, x.norm())) break;
  }
  return x;
}

}  // namespace jointspar
