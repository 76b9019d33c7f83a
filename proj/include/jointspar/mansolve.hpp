#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "jointspar/common.hpp"
#include "jointspar/penalty.hpp"

namespace jointspar {

enum class Termination { grad_tol, max_iter, line_search_stall, rank_guard_tripped };

const char* to_string(Termination t);

struct SolverOptions {
  int max_iter = 1000;
  double grad_rel_tol = 1e-8;     // stop when ||g|| / ||g at Z0|| falls below
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;  // in (0,1)
  // Line-search starting step: <= 0 selects the Barzilai-Borwein heuristic
  // (clipped to [1e-10, 1e4]); a positive value is used as a fixed t0.
  double initial_step = 0.0;
  int n_starts = 5;
  double rank_guard = 1e-10;      // reject iterates with sigma_min/sigma_1 below
  std::uint64_t seed = 0;

  // Optional early-stop certificate for multi_start_solve: a start whose
  // final exact_penalty is within target_penalty_tol of target_penalty and
  // whose relative residual ||A Z - V||_F / ||V||_F is below
  // target_residual_tol wins immediately and skips the remaining starts.
  std::optional<double> target_penalty;
  double target_penalty_tol = 1e-3;
  double target_residual_tol = 1e-4;

  // Extra initial points tried before the random starts (multi_start_solve
  // only). Each must be N x r. Random-start seeding is unaffected: random
  // start i still uses derive(seed, i).
  std::vector<Matrix> warm_starts;

  // Route every start of multi_start_solve through continuation_solve
  // instead of a single cg_minimize at the requested delta.
  bool use_continuation = false;

  // Test shim: replaces the closed-form gradient everywhere the solver
  // consumes one. Slow; for verification only.
  std::function<Matrix(const Matrix&)> gradient_override;
};

void validate(const SolverOptions& o);

struct SolveResult {
  Matrix Z_hat;
  std::vector<double> objective_trace;  // objective at Z0, then each accepted step
  std::vector<double> grad_norm_trace;  // matching gradient Frobenius norms
  std::vector<double> step_trace;       // accepted Armijo step per iteration
  int iterations = 0;                   // accepted steps
  int restarts_used = 0;                // starts consumed by multi_start_solve
  Termination termination = Termination::max_iter;
  double final_objective = 0.0;
  double final_penalty = 0.0;       // exact_penalty at Z_hat
  double final_rel_residual = 0.0;  // ||A Z_hat - V||_F / ||V||_F
  bool certified = false;           // early-stop certificate fired
};

struct ArmijoResult {
  double step = 0.0;
  Matrix Z_next;
  double f_next = 0.0;
  bool stalled = false;  // no acceptable step within 50 halvings
  int halvings = 0;
};

/// Backtracking line search: largest t = t0 * backtrack_factor^k (k >= 0, at
/// most 50 halvings) such that Z + t*direction passes the rank guard and
/// f(Z + t*direction) <= f(Z) + armijo_c * t * <grad, direction>. t0 is
/// opts.initial_step when positive, else 1. direction must be a descent
/// direction. Throws nothing on stall; inspect the flag.
ArmijoResult armijo_linesearch(const std::function<double(const Matrix&)>& f,
                               const Matrix& Z, const Matrix& direction,
                               const Matrix& grad, const SolverOptions& opts);

/// Polak-Ribiere+ nonlinear CG on objective(Z, A, V, params) over full-rank
/// N x r matrices: Euclidean metric, plain addition steps, rank-guarded
/// Armijo backtracking. Deterministic for fixed inputs.
SolveResult cg_minimize(const Matrix& A, const Matrix& V,
                        const ObjectiveParams& params, const Matrix& Z0,
                        const SolverOptions& opts);

/// Graduated smoothing: runs cg_minimize over a geometric ladder of smoothing
/// widths (0.64, 0.32, ... down to just above params.delta; 400 iterations and
/// gradient tolerance 1e-6 per stage), warm-starting each stage at the
/// previous stage's solution, then finishes with a full cg_minimize at
/// params.delta under the caller's opts. Wide smoothing makes the row penalty
/// nearly constant, so early stages see an almost-quadratic landscape; the
/// ladder tracks its minimizer as the kinks sharpen. Returns the final-stage
/// result (traces cover only that stage).
SolveResult continuation_solve(const Matrix& A, const Matrix& V,
                               const ObjectiveParams& params, const Matrix& Z0,
                               const SolverOptions& opts);

/// Runs the solver from opts.warm_starts (in order), then from n_starts
/// standard-normal initializations seeded by child streams of opts.seed
/// (random start i uses derive(seed, i)), sequentially. Each start is a
/// cg_minimize, or a continuation_solve when opts.use_continuation is set.
/// Returns the first certified start if the certificate is configured and
/// fires, otherwise the smallest final objective (ties break toward the
/// earlier start). Throws NumericFailure only if every start fails.
SolveResult multi_start_solve(const Matrix& A, const Matrix& V,
                              const ObjectiveParams& params,
                              const SolverOptions& opts);

}  // namespace jointspar
