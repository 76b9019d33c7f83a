#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jointspar/bench.hpp"
#include "jointspar/csv.hpp"
#include "jointspar/l21base.hpp"
#include "jointspar/mansolve.hpp"
#include "jointspar/matmodel.hpp"
#include "jointspar/penalty.hpp"
#include "jointspar/reduction.hpp"
#include "jointspar/rng.hpp"
#include "jointspar/verify.hpp"

namespace {

using namespace jointspar;

int cmd_generate(int m, int n, int kvec, int s, std::uint64_t seed,
                 const std::string& out_dir) {
  const ProblemInstance inst = make_instance(m, n, kvec, s, seed);
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  write_matrix_csv((dir / "A.csv").string(), inst.A);
  write_matrix_csv((dir / "X.csv").string(), inst.X_true);
  write_matrix_csv((dir / "Y.csv").string(), inst.Y);
  std::cout << "A: " << m << "x" << n << ", X: " << n << "x" << kvec
            << " with " << s << " non-zero rows, Y: " << m << "x" << kvec
            << ", seed " << seed << "\nwrote " << (dir / "A.csv").string()
            << ", " << (dir / "X.csv").string() << ", "
            << (dir / "Y.csv").string() << "\n";
  return 0;
}

int cmd_reduce(const std::string& a_path, const std::string& y_path,
               const std::string& out_dir, double rank_tol) {
  const Matrix A = read_matrix_csv(a_path);
  const Matrix Y = read_matrix_csv(y_path);
  const ReducedProblem rp = reduce_problem(A, Y, rank_tol);
  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  write_matrix_csv((dir / "V.csv").string(), rp.V);
  write_matrix_csv((dir / "U.csv").string(), rp.U);
  std::cout << "rank r = " << rp.r << "\nwrote " << (dir / "V.csv").string()
            << ", " << (dir / "U.csv").string() << "\n";
  return 0;
}

struct SolveArgs {
  std::string a_path, v_path, y_path, out_path;
  double lambda = 1.0, delta = 1e-3, grad_tol = 1e-8;
  int max_iter = 1000, n_starts = 5;
  std::uint64_t seed = 0;
  bool warm_l21 = false, continuation = false;
  double target_penalty = -1.0;  // < 0: no certificate
};

int cmd_solve(const SolveArgs& a) {
  require(a.v_path.empty() != a.y_path.empty(),
          "provide exactly one of --v (reduced) or --y (raw measurements)");
  const Matrix A = read_matrix_csv(a.a_path);

  Matrix V;
  Matrix U;  // empty unless lifting
  if (!a.v_path.empty()) {
    V = read_matrix_csv(a.v_path);
  } else {
    const ReducedProblem rp = reduce_problem(A, read_matrix_csv(a.y_path));
    V = rp.V;
    U = rp.U;
    std::cout << "reduced rank r = " << rp.r << "\n";
  }

  ObjectiveParams prm;
  prm.lambda = a.lambda;
  prm.delta = a.delta;
  SolverOptions so;
  so.max_iter = a.max_iter;
  so.grad_rel_tol = a.grad_tol;
  so.n_starts = a.n_starts;
  so.seed = a.seed;
  so.use_continuation = a.continuation;
  if (a.target_penalty >= 0.0) so.target_penalty = a.target_penalty;
  if (a.warm_l21) so.warm_starts = {solve_l21_reduced(A, V)};

  const SolveResult res = multi_start_solve(A, V, prm, so);
  std::cout << "termination: " << to_string(res.termination)
            << "\niterations: " << res.iterations
            << "\nstarts used: " << res.restarts_used
            << "\nobjective: " << format_double(res.final_objective)
            << "\nrow penalty: " << format_double(res.final_penalty)
            << "\nrelative residual: " << format_double(res.final_rel_residual)
            << "\ncertified: " << (res.certified ? "yes" : "no") << "\n";
  if (!a.out_path.empty()) {
    const Matrix X = U.size() > 0 ? lift_solution(res.Z_hat, U) : res.Z_hat;
    write_matrix_csv(a.out_path, X);
    std::cout << "wrote " << a.out_path << "\n";
  }
  return 0;
}

int cmd_baseline(const std::string& a_path, const std::string& y_path,
                 const std::string& out_path, const BaselineOptions& opts) {
  const Matrix A = read_matrix_csv(a_path);
  const Matrix Y = read_matrix_csv(y_path);
  BaselineReport rep;
  const Matrix Z = solve_l21(A, Y, opts, &rep);
  const double yn = Y.norm();
  std::cout << "converged: " << (rep.converged ? "yes" : "no")
            << "\niterations: " << rep.iterations << "\nstages: " << rep.stages
            << "\nresidual: " << format_double(rep.final_residual)
            << (yn > 0 ? " (relative " + format_double(rep.final_residual / yn) + ")"
                       : "")
            << "\n";
  if (!out_path.empty()) {
    write_matrix_csv(out_path, Z);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_check_grad(int n, int r, double delta, int samples, std::uint64_t seed,
                   const std::string& mode) {
  require(n >= 1 && r >= 1 && r <= n, "need 1 <= r <= n");
  require(samples >= 1, "samples must be >= 1");
  require(delta > 0.0, "delta must be positive");
  require(mode == "both" || mode == "exact" || mode == "huber",
          "mode must be both, exact or huber");
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
    const Matrix Z = gaussian_matrix(n, r, rng);
    if (mode != "huber") {
      const Matrix G = grad_exact_penalty(Z);
      const Matrix F = finite_diff_grad(
          [](const Matrix& W) { return exact_penalty(W); }, Z, h);
      worst = std::max(worst, (G - F).norm() / G.norm());
    }
    if (mode != "exact") {
      const Matrix G = grad_smoothed_penalty(Z, delta);
      const Matrix F = finite_diff_grad(
          [delta](const Matrix& W) { return smoothed_penalty(W, delta); }, Z,
          h);
      worst = std::max(worst, (G - F).norm() / G.norm());
    }
  }
  std::printf("max relative deviation: %.3e over %d samples (n=%d, r=%d, "
              "delta=%g, mode=%s)\n",
              worst, samples, n, r, delta, mode.c_str());
  return worst < 1e-5 ? 0 : 2;
}

int cmd_spark(const std::string& path) {
  const Matrix A = read_matrix_csv(path);
  std::cout << spark(A) << "\n";
  return 0;
}

struct SweepArgs {
  std::string config = "default";
  bool quick = false;
  std::string records = "sweep_records.csv";
  std::string summary = "sweep_summary.csv";
  std::string plot = "sweep_plot.svg";
};

int run_sweep(const SweepConfig& cfg, const SweepArgs& a) {
  validate(cfg);
  std::cout << "sweep: " << cfg.k_grid.size() << " k values x " << cfg.trials
            << " trials x " << cfg.methods.size() << " methods -> "
            << cfg.k_grid.size() * cfg.trials * cfg.methods.size()
            << " records\n";
  sweep(cfg, a.records);
  const auto records = read_records_csv(a.records);
  const auto rows = summarize(records, cfg.success_tol);
  write_summary_csv(rows, a.summary);
  emit_plot(rows, records, a.plot);
  std::cout << "wrote " << a.records << ", " << a.summary << ", " << a.plot
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint row-sparse recovery toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand(
      "generate", "draw a random instance (A, X, Y = A X) and write CSVs");
  int g_m = 80, g_n = 300, g_k = 70, g_s = 30;
  std::uint64_t g_seed = 0;
  std::string g_out;
  gen->add_option("--m", g_m, "measurement rows M");
  gen->add_option("--n", g_n, "signal dimension N");
  gen->add_option("--k", g_k, "measurement vectors K (columns of X)");
  gen->add_option("--s", g_s, "non-zero rows of X");
  gen->add_option("--seed", g_seed, "RNG seed");
  gen->add_option("--out", g_out, "output directory")->required();

  // reduce
  auto* red = app.add_subcommand(
      "reduce", "factor Y into V U (orthonormal-row U) and write CSVs");
  std::string r_a, r_y, r_out;
  double r_tol = kDefaultRankTol;
  red->add_option("--a", r_a, "sensing matrix CSV")->required();
  red->add_option("--y", r_y, "measurement CSV")->required();
  red->add_option("--out", r_out, "output directory")->required();
  red->add_option("--rank-tol", r_tol, "relative singular value cutoff");

  // solve
  auto* sol = app.add_subcommand(
      "solve", "manifold solve (reduced V or raw Y input)");
  SolveArgs sa;
  sol->add_option("--a", sa.a_path, "sensing matrix CSV")->required();
  sol->add_option("--v", sa.v_path, "reduced right-hand side CSV");
  sol->add_option("--y", sa.y_path, "raw measurement CSV (reduced internally)");
  sol->add_option("--out", sa.out_path, "solution CSV (lifted when --y)");
  sol->add_option("--lambda", sa.lambda, "data-fit weight");
  sol->add_option("--delta", sa.delta, "smoothing width");
  sol->add_option("--grad-tol", sa.grad_tol, "relative gradient tolerance");
  sol->add_option("--max-iter", sa.max_iter, "iteration cap per start");
  sol->add_option("--n-starts", sa.n_starts, "random starts");
  sol->add_option("--seed", sa.seed, "RNG seed");
  sol->add_flag("--warm-l21", sa.warm_l21,
                "prepend a row-sparse basis-pursuit warm start");
  sol->add_flag("--continuation", sa.continuation,
                "graduated smoothing on every start");
  sol->add_option("--target-penalty", sa.target_penalty,
                  "early-stop certificate target (row penalty)");

  // baseline
  auto* base = app.add_subcommand("baseline", "row-sparse basis pursuit");
  std::string b_a, b_y, b_out;
  BaselineOptions bo;
  base->add_option("--a", b_a, "sensing matrix CSV")->required();
  base->add_option("--y", b_y, "measurement CSV")->required();
  base->add_option("--out", b_out, "solution CSV");
  base->add_option("--mu", bo.mu, "initial row-penalty weight (<=0: auto)");
  base->add_option("--max-iter", bo.max_iter, "total inner iterations");
  base->add_option("--rel-tol", bo.rel_tol, "iterate-change stall tolerance");
  base->add_option("--rho", bo.rho, "splitting penalty");
  base->add_option("--residual-tol", bo.residual_tol,
                   "relative residual target");

  // sweep
  auto* sw = app.add_subcommand(
      "sweep", "phase-transition sweep; writes records, summary and plot");
  SweepArgs swa;
  SweepConfig overrides;  // receives flag values; applied if flag was given
  sw->add_option("--config", swa.config,
                 "config file (key = value or JSON), or 'default'");
  auto* quick_flag =
      sw->add_flag("--quick", swa.quick, "CI scale: 8 trials, k step 4, 3 starts");
  sw->add_option("--records", swa.records, "records CSV path");
  sw->add_option("--summary", swa.summary, "summary CSV path");
  sw->add_option("--plot", swa.plot, "plot SVG path");
  auto* o_trials = sw->add_option("--trials", overrides.trials, "trials per k");
  auto* o_seed = sw->add_option("--seed", overrides.seed, "sweep seed");
  auto* o_nstarts =
      sw->add_option("--n-starts", overrides.n_starts, "random starts");
  auto* o_maxit = sw->add_option("--max-iter", overrides.max_iter,
                                 "iteration cap per start");
  auto* o_lambda = sw->add_option("--lambda", overrides.lambda, "data-fit weight");
  auto* o_delta = sw->add_option("--delta", overrides.delta, "smoothing width");
  auto* o_gtol = sw->add_option("--grad-tol", overrides.grad_rel_tol,
                                "relative gradient tolerance");
  auto* o_stol = sw->add_option("--success-tol", overrides.success_tol,
                                "success threshold on relative error");
  std::vector<int> o_kgrid_vals;
  auto* o_kgrid = sw->add_option("--k-grid", o_kgrid_vals,
                                 "kept-row counts (space separated)");
  std::vector<std::string> o_methods_vals;
  auto* o_methods = sw->add_option("--methods", o_methods_vals,
                                   "subset of: manifold l21");
  quick_flag->excludes(sw->get_option("--config"));

  // summarize
  auto* sum = app.add_subcommand("summarize", "per-(k, method) medians");
  std::string su_in, su_out;
  double su_tol = 1e-3;
  sum->add_option("--records", su_in, "records CSV")->required();
  sum->add_option("--out", su_out, "summary CSV")->required();
  sum->add_option("--success-tol", su_tol, "success threshold");

  // plot
  auto* pl = app.add_subcommand("plot", "render records to a two-panel SVG");
  std::string pl_in, pl_out;
  double pl_tol = 1e-3;
  pl->add_option("--records", pl_in, "records CSV")->required();
  pl->add_option("--out", pl_out, "SVG path")->required();
  pl->add_option("--success-tol", pl_tol, "success threshold");

  // check-grad
  auto* cg = app.add_subcommand(
      "check-grad", "finite-difference audit of the penalty gradients");
  int cg_n = 12, cg_r = 3, cg_samples = 20;
  double cg_delta = 1e-3;
  std::uint64_t cg_seed = 0;
  std::string cg_mode = "both";
  cg->add_option("--n", cg_n, "rows of the test point");
  cg->add_option("--r", cg_r, "columns of the test point");
  cg->add_option("--delta", cg_delta, "smoothing width");
  cg->add_option("--samples", cg_samples, "random test points");
  cg->add_option("--seed", cg_seed, "RNG seed");
  cg->add_option("--mode", cg_mode, "both | exact | huber");

  // spark
  auto* sp = app.add_subcommand(
      "spark", "exhaustive spark of a small matrix (CSV)");
  std::string sp_path;
  sp->add_option("matrix", sp_path, "matrix CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text on stdout, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_generate(g_m, g_n, g_k, g_s, g_seed, g_out);
    if (red->parsed()) return cmd_reduce(r_a, r_y, r_out, r_tol);
    if (sol->parsed()) return cmd_solve(sa);
    if (base->parsed()) return cmd_baseline(b_a, b_y, b_out, bo);
    if (sw->parsed()) {
      SweepConfig cfg;
      if (swa.quick) cfg = quick_config();
      else if (swa.config != "default") cfg = load_config(swa.config);
      if (o_trials->count()) cfg.trials = overrides.trials;
      if (o_seed->count()) cfg.seed = overrides.seed;
      if (o_nstarts->count()) cfg.n_starts = overrides.n_starts;
      if (o_maxit->count()) cfg.max_iter = overrides.max_iter;
      if (o_lambda->count()) cfg.lambda = overrides.lambda;
      if (o_delta->count()) cfg.delta = overrides.delta;
      if (o_gtol->count()) cfg.grad_rel_tol = overrides.grad_rel_tol;
      if (o_stol->count()) cfg.success_tol = overrides.success_tol;
      if (o_kgrid->count()) cfg.k_grid = o_kgrid_vals;
      if (o_methods->count()) cfg.methods = o_methods_vals;
      return run_sweep(cfg, swa);
    }
    if (sum->parsed()) {
      write_summary_csv(summarize(read_records_csv(su_in), su_tol), su_out);
      std::cout << "wrote " << su_out << "\n";
      return 0;
    }
    if (pl->parsed()) {
      const auto records = read_records_csv(pl_in);
      emit_plot(summarize(records, pl_tol), records, pl_out);
      std::cout << "wrote " << pl_out << "\n";
      return 0;
    }
    if (cg->parsed())
      return cmd_check_grad(cg_n, cg_r, cg_delta, cg_samples, cg_seed, cg_mode);
    if (sp->parsed()) return cmd_spark(sp_path);
  } catch (const RankDeficiencyError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
