#include "jointspar/bench.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "jointspar/csv.hpp"
#include "jointspar/l21base.hpp"
#include "jointspar/mansolve.hpp"
#include "jointspar/matmodel.hpp"
#include "jointspar/reduction.hpp"
#include "jointspar/rng.hpp"
#include "jointspar/verify.hpp"

namespace jointspar {

const char* const kRecordsHeader =
    "k,trial,method,rel_error,support_match,iterations,restarts,wall_ms,seed";
const char* const kSummaryHeader =
    "k,method,median_rel_error,success_fraction,n_trials";

std::vector<int> default_k_grid() {
  std::vector<int> g;
  for (int k = 38; k <= 80; k += 2) g.push_back(k);
  return g;
}

namespace {

bool known_method(const std::string& m) { return m == "manifold" || m == "l21"; }

std::uint64_t method_index(const std::string& m) {
  return m == "manifold" ? 0 : 1;
}

int k_index_of(const SweepConfig& c, int k) {
  auto it = std::find(c.k_grid.begin(), c.k_grid.end(), k);
  require(it != c.k_grid.end(), "k not in the configured grid");
  return static_cast<int>(it - c.k_grid.begin());
}

}  // namespace

void validate(const SweepConfig& c) {
  require(c.M_full >= 1 && c.N >= 1 && c.K >= 1, "dimensions must be positive");
  require(c.s >= 1 && c.s <= c.N, "sparsity must lie in [1, N]");
  require(!c.k_grid.empty(), "k grid is empty");
  for (size_t i = 0; i < c.k_grid.size(); ++i) {
    require(c.k_grid[i] >= 1 && c.k_grid[i] <= c.M_full,
            "k grid entries must lie in [1, M_full]");
    require(i == 0 || c.k_grid[i] > c.k_grid[i - 1],
            "k grid must be strictly increasing");
  }
  require(c.trials >= 1, "trials must be >= 1");
  require(c.delta > 0.0 && c.lambda > 0.0, "delta and lambda must be positive");
  require(c.grad_rel_tol > 0.0, "grad_rel_tol must be positive");
  require(c.max_iter >= 1, "max_iter must be >= 1");
  require(c.n_starts >= 1, "n_starts must be >= 1");
  require(!c.methods.empty(), "methods list is empty");
  for (const auto& m : c.methods) {
    require(known_method(m), "unknown method: " + m);
    require(std::count(c.methods.begin(), c.methods.end(), m) == 1,
            "duplicate method: " + m);
  }
  require(c.success_tol > 0.0, "success_tol must be positive");
}

SweepConfig quick_config() {
  SweepConfig c;
  c.trials = 8;
  c.n_starts = 3;
  c.k_grid.clear();
  for (int k = 38; k <= 80; k += 4) c.k_grid.push_back(k);
  return c;
}

std::uint64_t record_seed(const SweepConfig& c, int k_index, int trial,
                          const std::string& method) {
  require(k_index >= 0 && k_index < static_cast<int>(c.k_grid.size()),
          "k_index out of range");
  require(trial >= 0 && trial < c.trials, "trial out of range");
  require(known_method(method), "unknown method: " + method);
  std::uint64_t s = Rng::derive(c.seed, static_cast<std::uint64_t>(k_index));
  s = Rng::derive(s, static_cast<std::uint64_t>(trial));
  return Rng::derive(s, method_index(method));
}

namespace {

SweepRecord run_cell(const SweepConfig& c, const ProblemInstance& inst, int k,
                     int k_index, int trial, const std::string& method) {
  SweepRecord rec;
  rec.k = k;
  rec.trial = trial;
  rec.method = method;
  rec.seed = record_seed(c, k_index, trial, method);

  const Matrix A_k = inst.A.topRows(k);
  const Matrix Y_k = inst.Y.topRows(k);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    RecoveryReport rep;
    if (method == "manifold") {
      const ReducedProblem rp = reduce_problem(A_k, Y_k);
      BaselineReport warm_rep;
      const Matrix W_warm = solve_l21_reduced(A_k, rp.V, {}, &warm_rep);

      ObjectiveParams prm;
      prm.lambda = c.lambda;
      prm.delta = c.delta;
      SolverOptions so;
      so.max_iter = c.max_iter;
      so.grad_rel_tol = c.grad_rel_tol;
      so.n_starts = c.n_starts;
      so.seed = rec.seed;
      so.warm_starts = {W_warm};
      so.use_continuation = true;
      if (rp.r == inst.s) so.target_penalty = static_cast<double>(inst.s);

      const SolveResult res = multi_start_solve(rp.A, rp.V, prm, so);
      const Matrix X_hat = lift_solution(res.Z_hat, rp.U);
      rep = recovery_report(X_hat, inst.X_true, c.success_tol);
      rec.iterations = res.iterations;
      rec.restarts = res.restarts_used;
    } else {
      BaselineReport brep;
      const Matrix X_hat = solve_l21(A_k, Y_k, {}, &brep);
      rep = recovery_report(X_hat, inst.X_true, c.success_tol);
      rec.iterations = brep.iterations;
      rec.restarts = 0;
    }
    rec.rel_error = rep.rel_error;
    rec.support_match = rep.support_match;
  } catch (const std::exception&) {
    rec.rel_error = 1.0;
    rec.support_match = false;
    rec.iterations = -1;
    rec.restarts = 0;
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return rec;
}

ProblemInstance trial_instance(const SweepConfig& c, int trial) {
  return make_instance(c.M_full, c.N, c.K, c.s,
                       Rng::derive(c.seed, static_cast<std::uint64_t>(trial)));
}

}  // namespace

std::vector<SweepRecord> run_trial(const SweepConfig& c, int k,
                                   int trial_index) {
  validate(c);
  const int ki = k_index_of(c, k);
  require(trial_index >= 0 && trial_index < c.trials, "trial out of range");
  const ProblemInstance inst = trial_instance(c, trial_index);
  std::vector<SweepRecord> out;
  out.reserve(c.methods.size());
  for (const auto& m : c.methods)
    out.push_back(run_cell(c, inst, k, ki, trial_index, m));
  return out;
}

namespace {

std::string bool_field(bool b) { return b ? "1" : "0"; }

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const int v = std::stoi(trim(s), &pos);
    require(pos == trim(s).size(), "trailing characters in " + what);
    return v;
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse " + what + ": " + s);
  }
}

long long parse_ll(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(trim(s), &pos);
    require(pos == trim(s).size(), "trailing characters in " + what);
    return v;
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse " + what + ": " + s);
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(trim(s), &pos);
    require(pos == trim(s).size(), "trailing characters in " + what);
    return static_cast<std::uint64_t>(v);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse " + what + ": " + s);
  }
}

double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  require(end == t.c_str() + t.size() && !t.empty(),
          "cannot parse " + what + ": " + s);
  return v;
}

bool parse_bool_field(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  require(t == "0" || t == "1", what + " must be 0 or 1: " + s);
  return t == "1";
}

}  // namespace

std::string to_csv_line(const SweepRecord& r) {
  std::ostringstream os;
  os << r.k << ',' << r.trial << ',' << r.method << ','
     << format_double(r.rel_error) << ',' << bool_field(r.support_match) << ','
     << r.iterations << ',' << r.restarts << ',' << r.wall_ms << ',' << r.seed;
  return os.str();
}

std::vector<SweepRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "empty records file");
  require(trim(line) == kRecordsHeader, "unexpected records header: " + line);
  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    require(f.size() == 9, "expected 9 fields, got line: " + line);
    SweepRecord r;
    r.k = parse_int(f[0], "k");
    r.trial = parse_int(f[1], "trial");
    r.method = trim(f[2]);
    require(known_method(r.method), "unknown method in records: " + r.method);
    r.rel_error = parse_double(f[3], "rel_error");
    r.support_match = parse_bool_field(f[4], "support_match");
    r.iterations = parse_int(f[5], "iterations");
    r.restarts = parse_int(f[6], "restarts");
    r.wall_ms = parse_ll(f[7], "wall_ms");
    r.seed = parse_u64(f[8], "seed");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records,
                                  double success_tol) {
  require(success_tol > 0.0, "success_tol must be positive");
  std::map<std::pair<int, std::string>, std::vector<double>> groups;
  for (const auto& r : records) groups[{r.k, r.method}].push_back(r.rel_error);
  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, errs] : groups) {
    std::sort(errs.begin(), errs.end());
    const size_t n = errs.size();
    SummaryRow row;
    row.k = key.first;
    row.method = key.second;
    row.median_rel_error = (n % 2 == 1)
                               ? errs[n / 2]
                               : 0.5 * (errs[n / 2 - 1] + errs[n / 2]);
    int succ = 0;
    for (double e : errs)
      if (e < success_tol) ++succ;
    row.success_fraction = static_cast<double>(succ) / static_cast<double>(n);
    row.n_trials = static_cast<int>(n);
    rows.push_back(std::move(row));
  }
  return rows;  // map iteration is already (k, method)-sorted
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.k << ',' << r.method << ',' << format_double(r.median_rel_error)
        << ',' << format_double(r.success_fraction) << ',' << r.n_trials
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

struct Cell {
  int k = 0;
  int k_index = 0;
  int trial = 0;
  std::string method;
};

int worker_count(size_t n_tasks) {
  const char* env = std::getenv("JOINTSPAR_WORKERS");
  int w = 1;
  if (env != nullptr) {
    try {
      w = std::stoi(env);
    } catch (const std::exception&) {
      w = 1;
    }
  }
  w = std::max(1, std::min(w, 64));
  return static_cast<int>(std::min<size_t>(w, std::max<size_t>(n_tasks, 1)));
}

}  // namespace

void sweep(const SweepConfig& c, const std::string& csv_path) {
  validate(c);
  const std::string meta_path = csv_path + ".meta";
  const std::string fp = config_fingerprint(c);

  std::map<std::tuple<int, int, std::string>, SweepRecord> done;
  if (std::filesystem::exists(csv_path)) {
    std::ifstream meta(meta_path);
    require(static_cast<bool>(meta),
            "records file exists without its .meta sidecar; refusing to "
            "resume: " + csv_path);
    std::stringstream ss;
    ss << meta.rdbuf();
    require(ss.str() == fp,
            "existing records were produced under a different config: " +
                csv_path);
    for (auto& r : read_records_csv(csv_path)) {
      auto key = std::make_tuple(r.k, r.trial, r.method);
      require(done.find(key) == done.end(),
              "duplicate (k, trial, method) record in " + csv_path);
      done.emplace(std::move(key), std::move(r));
    }
  }

  {
    std::ofstream meta(meta_path);
    if (!meta) throw std::runtime_error("cannot open " + meta_path);
    meta << fp;
  }

  // Canonical cell order; cells already on disk re-emit their stored record.
  std::vector<Cell> cells;
  std::vector<size_t> missing;  // indices into cells
  for (int ki = 0; ki < static_cast<int>(c.k_grid.size()); ++ki)
    for (int t = 0; t < c.trials; ++t)
      for (const auto& m : c.methods) {
        Cell cell{c.k_grid[ki], ki, t, m};
        if (done.find({cell.k, cell.trial, cell.method}) == done.end())
          missing.push_back(cells.size());
        cells.push_back(std::move(cell));
      }

  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + csv_path);
  out << kRecordsHeader << '\n';

  // Results for missing cells, keyed by position in `missing`. Workers fill
  // the map; the writer drains it strictly in canonical order, so the file
  // bytes never depend on the worker count.
  std::map<size_t, SweepRecord> ready;
  std::mutex mu;
  std::condition_variable cv;
  size_t next_task = 0;

  auto compute = [&]() {
    for (;;) {
      size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next_task >= missing.size()) return;
        idx = next_task++;
      }
      const Cell& cell = cells[missing[idx]];
      const ProblemInstance inst = trial_instance(c, cell.trial);
      SweepRecord rec =
          run_cell(c, inst, cell.k, cell.k_index, cell.trial, cell.method);
      {
        std::lock_guard<std::mutex> lock(mu);
        ready.emplace(idx, std::move(rec));
      }
      cv.notify_one();
    }
  };

  const int workers = worker_count(missing.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < workers - 1; ++w) pool.emplace_back(compute);

  size_t next_missing = 0;
  for (const auto& cell : cells) {
    auto it = done.find({cell.k, cell.trial, cell.method});
    if (it != done.end()) {
      out << to_csv_line(it->second) << '\n' << std::flush;
      continue;
    }
    const size_t idx = next_missing++;
    SweepRecord rec;
    if (workers == 1) {
      const ProblemInstance inst = trial_instance(c, cell.trial);
      rec = run_cell(c, inst, cell.k, cell.k_index, cell.trial, cell.method);
    } else {
      std::unique_lock<std::mutex> lock(mu);
      // The writer doubles as a worker while its next record is not ready.
      while (ready.find(idx) == ready.end()) {
        bool can_compute = next_task < missing.size();
        if (can_compute) {
          const size_t my = next_task++;
          lock.unlock();
          const Cell& mine = cells[missing[my]];
          const ProblemInstance inst = trial_instance(c, mine.trial);
          SweepRecord r =
              run_cell(c, inst, mine.k, mine.k_index, mine.trial, mine.method);
          lock.lock();
          ready.emplace(my, std::move(r));
          cv.notify_one();
        } else {
          cv.wait(lock, [&] { return ready.find(idx) != ready.end(); });
        }
      }
      rec = std::move(ready.at(idx));
      ready.erase(idx);
    }
    out << to_csv_line(rec) << '\n' << std::flush;
    if (!out) {
      for (auto& th : pool) th.join();
      throw std::runtime_error("write failed: " + csv_path);
    }
  }
  for (auto& th : pool) th.join();
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

void apply_flat(SweepConfig& c, const std::string& key,
                const std::string& val) {
  if (key == "M_full") c.M_full = parse_int(val, key);
  else if (key == "N") c.N = parse_int(val, key);
  else if (key == "K") c.K = parse_int(val, key);
  else if (key == "s") c.s = parse_int(val, key);
  else if (key == "k_grid") {
    c.k_grid.clear();
    for (const auto& tok : split_list(val)) c.k_grid.push_back(parse_int(tok, key));
  } else if (key == "trials") c.trials = parse_int(val, key);
  else if (key == "delta") c.delta = parse_double(val, key);
  else if (key == "lambda") c.lambda = parse_double(val, key);
  else if (key == "grad_rel_tol") c.grad_rel_tol = parse_double(val, key);
  else if (key == "max_iter") c.max_iter = parse_int(val, key);
  else if (key == "n_starts") c.n_starts = parse_int(val, key);
  else if (key == "seed") c.seed = parse_u64(val, key);
  else if (key == "methods") c.methods = split_list(val);
  else if (key == "success_tol") c.success_tol = parse_double(val, key);
  else throw std::invalid_argument("unknown config key: " + key);
}

SweepConfig from_json(const nlohmann::json& j) {
  require(j.is_object(), "config JSON must be an object");
  SweepConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "M_full") c.M_full = value.get<int>();
      else if (key == "N") c.N = value.get<int>();
      else if (key == "K") c.K = value.get<int>();
      else if (key == "s") c.s = value.get<int>();
      else if (key == "k_grid") c.k_grid = value.get<std::vector<int>>();
      else if (key == "trials") c.trials = value.get<int>();
      else if (key == "delta") c.delta = value.get<double>();
      else if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "grad_rel_tol") c.grad_rel_tol = value.get<double>();
      else if (key == "max_iter") c.max_iter = value.get<int>();
      else if (key == "n_starts") c.n_starts = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "methods") c.methods = value.get<std::vector<std::string>>();
      else if (key == "success_tol") c.success_tol = value.get<double>();
      else throw std::invalid_argument("unknown config key: " + key);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("bad value for config key '" + key +
                                  "': " + e.what());
    }
  }
  return c;
}

}  // namespace

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  size_t first = text.find_first_not_of(" \t\r\n");
  require(first != std::string::npos, "config file is empty: " + path);

  SweepConfig c;
  if (text[first] == '{') {
    try {
      c = from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("config JSON parse error: ") +
                                  e.what());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      require(eq != std::string::npos, "expected key = value, got: " + line);
      apply_flat(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  validate(c);
  return c;
}

std::string config_fingerprint(const SweepConfig& c) {
  std::ostringstream os;
  os << "M_full=" << c.M_full << '\n'
     << "N=" << c.N << '\n'
     << "K=" << c.K << '\n'
     << "s=" << c.s << '\n';
  os << "k_grid=";
  for (size_t i = 0; i < c.k_grid.size(); ++i)
    os << (i ? "," : "") << c.k_grid[i];
  os << '\n';
  os << "trials=" << c.trials << '\n'
     << "delta=" << format_double(c.delta) << '\n'
     << "lambda=" << format_double(c.lambda) << '\n'
     << "grad_rel_tol=" << format_double(c.grad_rel_tol) << '\n'
     << "max_iter=" << c.max_iter << '\n'
     << "n_starts=" << c.n_starts << '\n'
     << "seed=" << c.seed << '\n';
  os << "methods=";
  for (size_t i = 0; i < c.methods.size(); ++i)
    os << (i ? "," : "") << c.methods[i];
  os << '\n';
  os << "success_tol=" << format_double(c.success_tol) << '\n';
  return os.str();
}

}  // namespace jointspar
