#include "jointspar/mansolve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "jointspar/matmodel.hpp"
#include "jointspar/rng.hpp"

namespace jointspar {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::grad_tol: return "grad_tol";
    case Termination::max_iter: return "max_iter";
    case Termination::line_search_stall: return "line_search_stall";
    case Termination::rank_guard_tripped: return "rank_guard_tripped";
  }
  return "unknown";
}

void validate(const SolverOptions& o) {
  require(o.max_iter >= 1, "SolverOptions: max_iter must be >= 1");
  require(o.n_starts >= 1, "SolverOptions: n_starts must be >= 1");
  require(std::isfinite(o.grad_rel_tol) && o.grad_rel_tol > 0.0,
          "SolverOptions: grad_rel_tol must be positive");
  require(std::isfinite(o.armijo_c) && o.armijo_c > 0.0 && o.armijo_c < 1.0,
          "SolverOptions: armijo_c must lie in (0,1)");
  require(std::isfinite(o.backtrack_factor) && o.backtrack_factor > 0.0 &&
              o.backtrack_factor < 1.0,
          "SolverOptions: backtrack_factor must lie in (0,1)");
  require(std::isfinite(o.rank_guard) && o.rank_guard > 0.0,
          "SolverOptions: rank_guard must be positive");
  require(o.target_penalty_tol > 0.0 && o.target_residual_tol > 0.0,
          "SolverOptions: certificate tolerances must be positive");
}

namespace {

constexpr int kMaxHalvings = 50;
constexpr double kStepClipLo = 1e-10;
constexpr double kStepClipHi = 1e4;

double frob_inner(const Matrix& X, const Matrix& Y) {
  return (X.array() * Y.array()).sum();
}

double clip_step(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) return 1.0;
  return std::min(std::max(t, kStepClipLo), kStepClipHi);
}

double rank_ratio(const Vector& sigma) {
  return sigma(0) > 0.0 ? sigma(sigma.size() - 1) / sigma(0) : 0.0;
}

// Objective pieces at a trial point, sharing one SVD. The residual R = AZ - V
// arrives precomputed (the line search updates it incrementally).
struct PointEval {
  bool rank_ok = false;
  double sigma_ratio = 0.0;
  double value = std::numeric_limits<double>::quiet_NaN();
  Matrix U, Vt;
  Vector sigma;
  Vector row_norms;  // rows of Q = U * Vt
};

PointEval eval_point(const Matrix& Z, const Matrix& R, const ObjectiveParams& p,
                     double rank_guard) {
  PointEval e;
  const Index r = Z.cols();
  // Factor Z through the r x r Gram matrix: much cheaper than an N x r SVD,
  // but squaring the conditioning only resolves sigma ratios down to ~1e-7.
  // Below that (or on eigensolver failure) fall back to a full SVD so the
  // rank guard always sees trustworthy ratios.
  bool gram_ok = false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Z.transpose() * Z);
  if (es.info() == Eigen::Success) {
    const Vector ev = es.eigenvalues().reverse();  // descending
    if (ev(r - 1) > 0.0 && ev(r - 1) / ev(0) > 1e-14) {
      gram_ok = true;
      e.sigma = ev.cwiseSqrt();
      e.sigma_ratio = rank_ratio(e.sigma);
      if (!(e.sigma_ratio >= rank_guard)) return e;
      const Matrix Vm = es.eigenvectors().rowwise().reverse();
      e.Vt = Vm.transpose();
      e.U.noalias() = Z * (Vm * e.sigma.cwiseInverse().asDiagonal());
    }
  }
  if (!gram_ok) {
    Eigen::BDCSVD<Matrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    e.sigma = svd.singularValues();
    e.sigma_ratio = rank_ratio(e.sigma);
    if (!(e.sigma_ratio >= rank_guard)) return e;
    e.U = svd.matrixU();
    e.Vt = svd.matrixV().transpose();
  }
  e.rank_ok = true;
  Matrix Q = e.U * e.Vt;
  e.row_norms.resize(Q.rows());
  double pen = 0.0;
  for (Index i = 0; i < Q.rows(); ++i) {
    const double n = Q.row(i).norm();
    e.row_norms(i) = n;
    pen += (n >= p.delta ? n - 0.5 * p.delta : n * n / (2.0 * p.delta)) +
           0.5 * p.delta;
  }
  e.value = pen + 0.5 * p.lambda * R.squaredNorm();
  return e;
}

Matrix grad_from_eval(const PointEval& e, const Matrix& A, const Matrix& R,
                      const ObjectiveParams& p) {
  Vector w(e.row_norms.size());
  for (Index i = 0; i < w.size(); ++i) {
    const double n = e.row_norms(i);
    w(i) = n == 0.0 ? 0.0 : std::min(1.0 / n, 1.0 / p.delta);
  }
  Matrix T = w.asDiagonal() * (e.U * (e.sigma.cwiseInverse().asDiagonal() * e.Vt));
  Matrix G = T - e.U * (e.U.transpose() * T);
  G.noalias() += p.lambda * (A.transpose() * R);
  return G;
}

}  // namespace

ArmijoResult armijo_linesearch(const std::function<double(const Matrix&)>& f,
                               const Matrix& Z, const Matrix& direction,
                               const Matrix& grad, const SolverOptions& opts) {
  validate(opts);
  require(Z.rows() == direction.rows() && Z.cols() == direction.cols() &&
              Z.rows() == grad.rows() && Z.cols() == grad.cols(),
          "armijo_linesearch: shape mismatch");
  const double slope = frob_inner(grad, direction);
  require(std::isfinite(slope) && slope < 0.0,
          "armijo_linesearch: direction is not a descent direction");
  const double f0 = f(Z);
  require(std::isfinite(f0), "armijo_linesearch: objective not finite at Z");

  ArmijoResult res;
  double t = opts.initial_step > 0.0 ? opts.initial_step : 1.0;
  for (int k = 0; k <= kMaxHalvings; ++k, t *= opts.backtrack_factor) {
    Matrix Zt = Z + t * direction;
    Eigen::BDCSVD<Matrix> svd(Zt);
    if (!(rank_ratio(svd.singularValues()) >= opts.rank_guard)) continue;
    double ft;
    try {
      ft = f(Zt);
    } catch (const RankDeficiencyError&) {
      continue;
    }
    if (std::isfinite(ft) && ft <= f0 + opts.armijo_c * t * slope) {
      res.step = t;
      res.Z_next = std::move(Zt);
      res.f_next = ft;
      res.halvings = k;
      return res;
    }
  }
  res.stalled = true;
  res.Z_next = Z;
  res.f_next = f0;
  res.halvings = kMaxHalvings;
  return res;
}

SolveResult cg_minimize(const Matrix& A, const Matrix& V,
                        const ObjectiveParams& params, const Matrix& Z0,
                        const SolverOptions& opts) {
  validate(params);
  validate(opts);
  require(A.cols() == Z0.rows() && A.rows() == V.rows() && V.cols() == Z0.cols(),
          "cg_minimize: shape mismatch");
  require(Z0.rows() >= Z0.cols() && Z0.cols() >= 1,
          "cg_minimize: unknown must have at least as many rows as columns");
  require(Z0.allFinite(), "cg_minimize: Z0 has non-finite entries");

  Matrix Z = Z0;
  Matrix R = A * Z - V;
  PointEval e = eval_point(Z, R, params, opts.rank_guard);
  if (!e.rank_ok)
    throw std::invalid_argument(
        "cg_minimize: Z0 fails the rank guard (sigma_min/sigma_1 = " +
        std::to_string(e.sigma_ratio) + ")");
  if (!std::isfinite(e.value))
    throw NumericFailure("cg_minimize: objective not finite at Z0");

  auto gradient = [&](const Matrix& Zc, const PointEval& ec,
                      const Matrix& Rc) -> Matrix {
    if (opts.gradient_override) return opts.gradient_override(Zc);
    return grad_from_eval(ec, A, Rc, params);
  };

  Matrix g = gradient(Z, e, R);
  if (!g.allFinite()) throw NumericFailure("cg_minimize: gradient not finite at Z0");
  double f = e.value;
  double gnorm = g.norm();
  const double gnorm0 = gnorm;
  // Stopping scale: relative reduction from the start, floored at a small
  // fraction of the problem's own gradient scale (lambda ||A^T V|| is the
  // fidelity gradient at 0) so near-critical starts exit instead of chasing
  // noise below what the data could ever resolve.
  const double gscale = std::max(
      gnorm0, 0.01 * params.lambda * (A.transpose() * V).norm());
  const double gstop = opts.grad_rel_tol * gscale;

  SolveResult res;
  res.objective_trace.push_back(f);
  res.grad_norm_trace.push_back(gnorm);
  res.termination = Termination::max_iter;

  if (gnorm <= gstop) {
    res.termination = Termination::grad_tol;
  } else {
    Matrix P = -g;
    bool p_is_steepest = true;
    double gg = g.squaredNorm();
    double t_bb = 1.0 / (1.0 + gnorm);  // first-iteration heuristic
    double last_t = t_bb;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
      double slope = frob_inner(g, P);
      if (!(slope < 0.0)) {
        P = -g;
        slope = -gg;
        p_is_steepest = true;
      }
      double t0 = opts.initial_step > 0.0 ? opts.initial_step : clip_step(t_bb);

      Matrix AP = A * P;
      bool accepted = false;
      bool last_reject_rank = false;
      double t = t0;
      Matrix Zt, Rt;
      PointEval et;
      while (true) {
        for (int k = 0; k <= kMaxHalvings; ++k, t *= opts.backtrack_factor) {
          Zt = Z + t * P;
          Rt = R + t * AP;
          et = eval_point(Zt, Rt, params, opts.rank_guard);
          if (!et.rank_ok) {
            last_reject_rank = true;
            continue;
          }
          last_reject_rank = false;
          if (!std::isfinite(et.value))
            throw NumericFailure("cg_minimize: objective not finite at a trial point");
          if (et.value <= f + opts.armijo_c * t * slope) {
            accepted = true;
            break;
          }
        }
        if (accepted || p_is_steepest) break;
        // The conjugate direction failed the whole backtracking ladder; retry
        // once from steepest descent before giving up.
        P = -g;
        slope = -gg;
        p_is_steepest = true;
        AP = A * P;
        t = opts.initial_step > 0.0 ? opts.initial_step
                                    : clip_step(1.0 / (1.0 + gnorm));
        last_reject_rank = false;
      }
      if (!accepted) {
        res.termination = last_reject_rank ? Termination::rank_guard_tripped
                                           : Termination::line_search_stall;
        break;
      }

      Matrix g_new = gradient(Zt, et, Rt);
      if (!g_new.allFinite())
        throw NumericFailure("cg_minimize: gradient not finite at an accepted point");

      Matrix Yv = g_new - g;
      const double sy = t * frob_inner(P, Yv);  // <S, Y> with S = t P
      t_bb = sy > 0.0 ? t * t * P.squaredNorm() / sy : 2.0 * std::max(t, last_t);
      last_t = t;

      const double beta = std::max(0.0, frob_inner(g_new, Yv) / gg);
      P = -g_new + beta * P;
      p_is_steepest = (beta == 0.0);

      Z.swap(Zt);
      R.swap(Rt);
      f = et.value;
      g.swap(g_new);
      gnorm = g.norm();
      gg = gnorm * gnorm;

      res.objective_trace.push_back(f);
      res.grad_norm_trace.push_back(gnorm);
      res.step_trace.push_back(t);
      ++res.iterations;

      if (gnorm <= gstop) {
        res.termination = Termination::grad_tol;
        break;
      }
    }
  }

  res.Z_hat = std::move(Z);
  res.final_objective = f;
  const double vn = V.norm();
  res.final_rel_residual =
      vn > 0.0 ? (A * res.Z_hat - V).norm() / vn : (A * res.Z_hat).norm();
  try {
    res.final_penalty = exact_penalty(res.Z_hat);
  } catch (const RankDeficiencyError&) {
    res.final_penalty = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

SolveResult continuation_solve(const Matrix& A, const Matrix& V,
                               const ObjectiveParams& params, const Matrix& Z0,
                               const SolverOptions& opts) {
  validate(params);
  validate(opts);
  constexpr double kDelta0 = 0.64;
  constexpr double kShrink = 0.5;
  SolverOptions stage_opts = opts;
  stage_opts.max_iter = std::min(opts.max_iter, 400);
  stage_opts.grad_rel_tol = std::max(opts.grad_rel_tol, 1e-6);
  Matrix Z = Z0;
  for (double d = kDelta0; d > params.delta / kShrink * 0.95; d *= kShrink) {
    ObjectiveParams stage = params;
    stage.delta = d;
    Z = cg_minimize(A, V, stage, Z, stage_opts).Z_hat;
  }
  return cg_minimize(A, V, params, Z, opts);
}

SolveResult multi_start_solve(const Matrix& A, const Matrix& V,
                              const ObjectiveParams& params,
                              const SolverOptions& opts) {
  validate(params);
  validate(opts);
  require(A.rows() == V.rows(), "multi_start_solve: A and V row counts differ");
  const Index N = A.cols();
  const Index r = V.cols();
  require(N >= r && r >= 1, "multi_start_solve: need A columns >= V columns >= 1");
  for (const Matrix& W : opts.warm_starts)
    require(W.rows() == N && W.cols() == r && W.allFinite(),
            "multi_start_solve: warm start shape mismatch or non-finite");

  const int n_warm = static_cast<int>(opts.warm_starts.size());
  std::optional<SolveResult> best;
  std::string diagnostics;
  int runs = 0;
  for (int i = 0; i < n_warm + opts.n_starts; ++i) {
    Matrix Z0;
    if (i < n_warm) {
      Z0 = opts.warm_starts[i];
    } else {
      Rng rng(Rng::derive(opts.seed, static_cast<std::uint64_t>(i - n_warm)));
      Z0 = gaussian_matrix(N, r, rng);
    }
    ++runs;
    SolveResult cur;
    try {
      cur = opts.use_continuation ? continuation_solve(A, V, params, Z0, opts)
                                  : cg_minimize(A, V, params, Z0, opts);
    } catch (const std::exception& ex) {
      diagnostics += "start " + std::to_string(i) + ": " + ex.what() + "; ";
      continue;
    }
    const bool cert = opts.target_penalty.has_value() &&
                      std::isfinite(cur.final_penalty) &&
                      cur.final_penalty <=
                          *opts.target_penalty + opts.target_penalty_tol &&
                      cur.final_rel_residual <= opts.target_residual_tol;
    if (cert) {
      cur.certified = true;
      best = std::move(cur);
      break;
    }
    if (!best || cur.final_objective < best->final_objective)
      best = std::move(cur);
  }
  if (!best)
    throw NumericFailure("multi_start_solve: every start failed: " + diagnostics);
  best->restarts_used = runs;
  return std::move(*best);
}

}  // namespace jointspar
