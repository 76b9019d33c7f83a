#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "jointspar/bench.hpp"
#include "jointspar/csv.hpp"

using namespace jointspar;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("jointspar_bench_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int counter;
};
int TempDir::counter = 0;

// Fast desk-scale configuration used by all sweep tests.
SweepConfig tiny_config() {
  SweepConfig c;
  c.M_full = 20;
  c.N = 40;
  c.K = 8;
  c.s = 3;
  c.k_grid = {12, 16, 20};
  c.trials = 3;
  c.n_starts = 2;
  c.seed = 5;
  return c;
}

bool same_modulo_wall(const SweepRecord& a, const SweepRecord& b) {
  return a.k == b.k && a.trial == b.trial && a.method == b.method &&
         a.rel_error == b.rel_error && a.support_match == b.support_match &&
         a.iterations == b.iterations && a.restarts == b.restarts &&
         a.seed == b.seed;
}

bool same_modulo_wall(const std::vector<SweepRecord>& a,
                      const std::vector<SweepRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!same_modulo_wall(a[i], b[i])) return false;
  return true;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int n = 0;
  for (size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("config validation and the quick alias") {
  CHECK_NOTHROW(validate(SweepConfig{}));
  SweepConfig c = tiny_config();
  c.k_grid = {12, 12};
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = tiny_config();
  c.k_grid = {25};  // above M_full
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = tiny_config();
  c.methods = {"manifold", "manifold"};
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = tiny_config();
  c.methods = {"newton"};
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = tiny_config();
  c.trials = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);

  const SweepConfig q = quick_config();
  CHECK(q.trials == 8);
  CHECK(q.n_starts == 3);
  REQUIRE(q.k_grid.size() >= 2);
  CHECK(q.k_grid.front() == 38);
  CHECK(q.k_grid[1] - q.k_grid[0] == 4);
  CHECK(q.k_grid.back() <= 80);

  const SweepConfig d;
  CHECK(d.M_full == 80);
  CHECK(d.N == 300);
  CHECK(d.K == 70);
  CHECK(d.s == 30);
  CHECK(d.trials == 22);
  CHECK(d.k_grid.front() == 38);
  CHECK(d.k_grid.back() == 80);
  CHECK(d.k_grid.size() == 22);
  CHECK(d.delta == 1e-3);
  CHECK(d.lambda == 9.0);
  CHECK(d.grad_rel_tol == 1e-8);
  CHECK(d.max_iter == 1000);
  CHECK(d.success_tol == 1e-3);
}

TEST_CASE("record seeds are pure in (seed, k index, trial, method)") {
  const SweepConfig c = tiny_config();
  CHECK(record_seed(c, 1, 2, "l21") == record_seed(c, 1, 2, "l21"));
  CHECK(record_seed(c, 1, 2, "l21") != record_seed(c, 1, 2, "manifold"));
  CHECK(record_seed(c, 1, 2, "l21") != record_seed(c, 0, 2, "l21"));
  CHECK(record_seed(c, 1, 2, "l21") != record_seed(c, 1, 1, "l21"));
  SweepConfig other = c;
  other.seed = 6;
  CHECK(record_seed(c, 1, 2, "l21") != record_seed(other, 1, 2, "l21"));
  CHECK_THROWS_AS(record_seed(c, 3, 0, "l21"), std::invalid_argument);
  CHECK_THROWS_AS(record_seed(c, 0, 3, "l21"), std::invalid_argument);
}

TEST_CASE("run_trial is deterministic and solves the easy cell") {
  const SweepConfig c = tiny_config();
  const auto recs = run_trial(c, 20, 0);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].method == "manifold");
  CHECK(recs[1].method == "l21");
  for (const auto& r : recs) {
    CHECK(r.k == 20);
    CHECK(r.trial == 0);
    CHECK(r.rel_error < c.success_tol);  // full measurement set: easy
    CHECK(r.support_match);
    CHECK(r.seed == record_seed(c, 2, 0, r.method));
  }
  CHECK(same_modulo_wall(recs, run_trial(c, 20, 0)));
  CHECK_THROWS_AS(run_trial(c, 13, 0), std::invalid_argument);  // k not in grid
}

TEST_CASE("records survive a CSV round trip, including failure markers") {
  TempDir tmp;
  std::vector<SweepRecord> recs;
  SweepRecord a{12, 0, "manifold", 3.25e-7, true, 41, 2, 17, 0x12345678ull};
  SweepRecord fail{12, 1, "l21", 1.0, false, -1, 0, 3, 42};
  recs.push_back(a);
  recs.push_back(fail);

  const std::string path = tmp.file("records.csv");
  {
    std::ofstream out(path);
    out << kRecordsHeader << '\n';
    for (const auto& r : recs) out << to_csv_line(r) << '\n';
  }
  const auto back = read_records_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(same_modulo_wall(back, recs));
  CHECK(back[0].wall_ms == 17);
  CHECK(back[1].iterations == -1);

  {
    std::ofstream out(path);
    out << "k,trial,method\n12,0,l21\n";
  }
  CHECK_THROWS_AS(read_records_csv(path), std::invalid_argument);
}

TEST_CASE("summarize: medians, success fractions, ordering") {
  auto rec = [](int k, const std::string& m, double e) {
    SweepRecord r;
    r.k = k;
    r.method = m;
    r.rel_error = e;
    return r;
  };
  std::vector<SweepRecord> recs = {
      rec(10, "l21", 1e-6), rec(10, "l21", 1e-6), rec(10, "l21", 1.0),
      rec(8, "manifold", 0.5)};
  const auto rows = summarize(recs, 1e-3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].k == 8);  // sorted by k, then method
  CHECK(rows[0].method == "manifold");
  CHECK(rows[0].median_rel_error == 0.5);  // single record is its own median
  CHECK(rows[0].success_fraction == 0.0);
  CHECK(rows[0].n_trials == 1);
  CHECK(rows[1].k == 10);
  CHECK(rows[1].median_rel_error == 1e-6);
  CHECK(rows[1].success_fraction == doctest::Approx(2.0 / 3.0));

  // even count: mean of the two central order statistics
  recs.push_back(rec(10, "l21", 1.0));
  const auto rows2 = summarize(recs, 1e-3);
  CHECK(rows2[1].median_rel_error == doctest::Approx(0.5 * (1e-6 + 1.0)));
  CHECK(rows2[1].success_fraction == 0.5);
}

TEST_CASE("sweep writes canonical records and is deterministic modulo wall "
          "time") {
  TempDir tmp;
  const SweepConfig c = tiny_config();
  sweep(c, tmp.file("a.csv"));
  const auto a = read_records_csv(tmp.file("a.csv"));
  REQUIRE(static_cast<int>(a.size()) ==
          static_cast<int>(c.k_grid.size()) * c.trials *
              static_cast<int>(c.methods.size()));

  // canonical order: k grid order, then trial, then method order
  size_t i = 0;
  for (int k : c.k_grid)
    for (int t = 0; t < c.trials; ++t)
      for (const auto& m : c.methods) {
        CHECK(a[i].k == k);
        CHECK(a[i].trial == t);
        CHECK(a[i].method == m);
        ++i;
      }

  sweep(c, tmp.file("b.csv"));
  CHECK(same_modulo_wall(a, read_records_csv(tmp.file("b.csv"))));

  // sidecar pins the config
  CHECK(slurp(tmp.file("a.csv.meta")) == config_fingerprint(c));

  // single-cell sweep
  SweepConfig small = c;
  small.trials = 1;
  small.k_grid = {20};
  small.methods = {"l21"};
  sweep(small, tmp.file("one.csv"));
  CHECK(read_records_csv(tmp.file("one.csv")).size() == 1);
}

TEST_CASE("an interrupted sweep resumes to the identical file") {
  TempDir tmp;
  const SweepConfig c = tiny_config();
  sweep(c, tmp.file("full.csv"));
  const auto full = read_records_csv(tmp.file("full.csv"));

  // keep the header plus the first 7 records, as if the run died mid-way
  {
    std::ifstream in(tmp.file("full.csv"));
    std::ofstream out(tmp.file("part.csv"));
    std::string line;
    for (int i = 0; i < 8 && std::getline(in, line); ++i) out << line << '\n';
  }
  fs::copy_file(tmp.file("full.csv.meta"), tmp.file("part.csv.meta"));
  sweep(c, tmp.file("part.csv"));
  const auto resumed = read_records_csv(tmp.file("part.csv"));
  CHECK(same_modulo_wall(full, resumed));

  // the 7 completed cells were reused verbatim, wall times included
  for (int i = 0; i < 7; ++i) CHECK(resumed[i].wall_ms == full[i].wall_ms);

  // a config change refuses to resume
  SweepConfig other = c;
  other.seed = 99;
  CHECK_THROWS_AS(sweep(other, tmp.file("part.csv")), std::invalid_argument);

  // records without their sidecar refuse to resume
  fs::remove(tmp.file("part.csv.meta"));
  CHECK_THROWS_AS(sweep(c, tmp.file("part.csv")), std::invalid_argument);
}

TEST_CASE("worker count does not change the output bytes") {
  TempDir tmp;
  const SweepConfig c = tiny_config();
  sweep(c, tmp.file("serial.csv"));
  ::setenv("JOINTSPAR_WORKERS", "3", 1);
  sweep(c, tmp.file("parallel.csv"));
  ::unsetenv("JOINTSPAR_WORKERS");
  CHECK(same_modulo_wall(read_records_csv(tmp.file("serial.csv")),
                         read_records_csv(tmp.file("parallel.csv"))));
}

TEST_CASE("plot: structure, single series, empty-summary error") {
  TempDir tmp;
  const SweepConfig c = tiny_config();
  sweep(c, tmp.file("r.csv"));
  const auto records = read_records_csv(tmp.file("r.csv"));
  const auto rows = summarize(records, c.success_tol);

  emit_plot(rows, records, tmp.file("plot.svg"));
  const std::string svg = slurp(tmp.file("plot.svg"));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(count_occurrences(svg, "<polyline") == 2);  // one median per method
  CHECK(count_occurrences(svg, "<circle") > 0);     // l21 markers
  CHECK(count_occurrences(svg, "<path") > 0);       // manifold markers
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);

  // one method only: a single median series
  std::vector<SweepRecord> l21_only;
  for (const auto& r : records)
    if (r.method == "l21") l21_only.push_back(r);
  emit_plot(summarize(l21_only, c.success_tol), l21_only, tmp.file("one.svg"));
  CHECK(count_occurrences(slurp(tmp.file("one.svg")), "<polyline") == 1);

  // empty summary: error before any file I/O
  CHECK_THROWS_AS(emit_plot({}, records, tmp.file("none.svg")),
                  std::invalid_argument);
  CHECK_FALSE(fs::exists(tmp.file("none.svg")));
}

TEST_CASE("config files: flat text and JSON agree, unknown keys rejected") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("flat.cfg"));
    out << "# comment line\n"
        << "M_full = 20\nN = 40\nK = 8\ns = 3\n"
        << "k_grid = 12, 16, 20\ntrials = 3\n"
        << "n_starts = 2\nseed = 5\n"
        << "methods = manifold, l21\n"
        << "lambda = 9  # trailing comment\n";
  }
  {
    std::ofstream out(tmp.file("same.json"));
    out << R"({"M_full": 20, "N": 40, "K": 8, "s": 3,
               "k_grid": [12, 16, 20], "trials": 3,
               "n_starts": 2, "seed": 5,
               "methods": ["manifold", "l21"], "lambda": 9})";
  }
  const SweepConfig flat = load_config(tmp.file("flat.cfg"));
  const SweepConfig json = load_config(tmp.file("same.json"));
  CHECK(config_fingerprint(flat) == config_fingerprint(json));
  CHECK(config_fingerprint(flat) == config_fingerprint(tiny_config()));

  {
    std::ofstream out(tmp.file("bad.cfg"));
    out << "M_full = 20\nwidgets = 7\n";
  }
  CHECK_THROWS_AS(load_config(tmp.file("bad.cfg")), std::invalid_argument);
  {
    std::ofstream out(tmp.file("bad.json"));
    out << R"({"M_full": "many"})";
  }
  CHECK_THROWS_AS(load_config(tmp.file("bad.json")), std::invalid_argument);
}

TEST_CASE("schema constants are frozen") {
  CHECK(std::string(kRecordsHeader) ==
        "k,trial,method,rel_error,support_match,iterations,restarts,wall_ms,"
        "seed");
  CHECK(std::string(kSummaryHeader) ==
        "k,method,median_rel_error,success_fraction,n_trials");
}
