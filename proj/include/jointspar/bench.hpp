#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jointspar/common.hpp"

namespace jointspar {

std::vector<int> default_k_grid();  // 38, 40, ..., 80

struct SweepConfig {
  int M_full = 80;
  int N = 300;
  int K = 70;
  int s = 30;
  std::vector<int> k_grid = default_k_grid();
  int trials = 22;
  double delta = 1e-3;
  double lambda = 9.0;
  double grad_rel_tol = 1e-8;
  int max_iter = 1000;
  int n_starts = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> methods = {"manifold", "l21"};
  double success_tol = 1e-3;
};

void validate(const SweepConfig& c);

/// CI-scale alias: trials=8, k grid stepping by 4, n_starts=3.
SweepConfig quick_config();

struct SweepRecord {
  int k = 0;
  int trial = 0;
  std::string method;
  double rel_error = 0.0;
  bool support_match = false;
  int iterations = 0;  // -1 marks a solver failure record
  int restarts = 0;
  long long wall_ms = 0;
  std::uint64_t seed = 0;
};

extern const char* const kRecordsHeader;  // k,trial,method,rel_error,...
extern const char* const kSummaryHeader;  // k,method,median_rel_error,...

/// Per-record solver seed: pure function of (config.seed, k_index, trial,
/// method), so any single record is reproducible in isolation. The problem
/// instance itself derives from (config.seed, trial) only — one (A, X) pair
/// per trial, shared by every k and method.
std::uint64_t record_seed(const SweepConfig& c, int k_index, int trial,
                          const std::string& method);

/// Runs one (k, trial) cell for every configured method. Solver failures
/// produce a marker record (rel_error = 1, support_match = false,
/// iterations = -1) instead of aborting.
std::vector<SweepRecord> run_trial(const SweepConfig& c, int k, int trial_index);

/// Full Cartesian sweep streamed to csv_path in canonical order (k-grid
/// order, then trial, then method). A partial file from an interrupted run
/// is resumed: already-present (k, trial, method) cells are skipped. The
/// sidecar `<csv_path>.meta` pins the config; resuming under a different
/// config is an error. JOINTSPAR_WORKERS caps cell-level parallelism
/// (default 1); output bytes are identical for any worker count.
void sweep(const SweepConfig& c, const std::string& csv_path);

struct SummaryRow {
  int k = 0;
  std::string method;
  double median_rel_error = 0.0;
  double success_fraction = 0.0;
  int n_trials = 0;
};

/// Per-(k, method) median relative error (even counts average the two
/// central order statistics) and success fraction at success_tol. Rows are
/// ordered by k, then method name.
std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records,
                                  double success_tol);

std::string to_csv_line(const SweepRecord& r);
std::vector<SweepRecord> read_records_csv(const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path);

/// Two-panel SVG: per-trial log10 errors vs k (circles: l21, triangles:
/// manifold) and median curves vs k (one polyline per method). Throws on an
/// empty summary before touching the filesystem.
void emit_plot(const std::vector<SummaryRow>& summary,
               const std::vector<SweepRecord>& records,
               const std::string& path);

/// Config file in flat `key = value` lines (# comments; lists comma
/// separated) or a JSON object with the same field names. Unknown keys are
/// rejected.
SweepConfig load_config(const std::string& path);

/// Canonical one-line-per-field serialization backing the resume sidecar.
std::string config_fingerprint(const SweepConfig& c);

}  // namespace jointspar
