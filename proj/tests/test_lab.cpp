#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "horolab/acceptance.hpp"
#include "horolab/errors.hpp"
#include "horolab/io.hpp"
#include "horolab/lab.hpp"
#include "horolab/random.hpp"

using namespace horolab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("horolab-test-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

ExperimentConfig small(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.output = out.string();
  cfg.window_radius = 3;
  cfg.seeds = 6;
  cfg.corner_seeds = 10;
  cfg.n_last = 6;
  cfg.threads = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config defaults round-trip through JSON") {
  const ExperimentConfig cfg;
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK_NOTHROW(cfg.validate());

  auto doc = cfg.to_json();
  doc["c"] = 1.5;
  doc["schedule"] = "linear";
  doc["n_range"] = {2, 9};
  const auto parsed = ExperimentConfig::from_json(doc);
  CHECK(parsed.c == 1.5);
  CHECK(parsed.schedule == ScheduleKind::kLinear);
  CHECK(parsed.n_first == 2);
  CHECK(parsed.n_last == 9);
}

TEST_CASE("config rejects bad values before any computation") {
  auto bad = [](nlohmann::json doc) {
    auto cfg = ExperimentConfig::from_json(doc);
    cfg.validate();
  };
  CHECK_THROWS_AS(bad({{"eps", {-0.1}}}), InputError);
  CHECK_THROWS_AS(bad({{"eps", {1.5}}}), InputError);
  CHECK_THROWS_AS(bad({{"eps", nlohmann::json::array()}}), InputError);
  CHECK_THROWS_AS(bad({{"bogus", 1}}), InputError);
  CHECK_THROWS_AS(bad({{"kernel", {{"width", 2}}}}), InputError);
  CHECK_THROWS_AS(bad({{"horizon", "long"}}), InputError);
  CHECK_THROWS_AS(bad({{"margin", 9.0}}), InputError);
  CHECK_THROWS_AS(bad({{"n_range", {5, 2}}}), InputError);
  CHECK_THROWS_AS(bad({{"n_range", {1}}}), InputError);
  CHECK_THROWS_AS(bad({{"c", -1.0}}), InputError);
  CHECK_THROWS_AS(bad({{"schedule", "curved"}}), InputError);
  CHECK_THROWS_AS(bad({{"first", {{"kind", "free"}}}}), InputError);

  TempDir tmp("reject");
  ExperimentConfig cfg;
  cfg.output = tmp.path.string();
  cfg.eps = {-0.05};
  CHECK_THROWS_AS(run("schedule", cfg), InputError);
  CHECK_FALSE(fs::exists(tmp.path));
  cfg.eps = {0.05};
  CHECK_THROWS_AS(run("nonsense", cfg), InputError);
}

TEST_CASE("format_double round-trips") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
  const CounterRng rng(5);
  for (std::uint64_t k = 0; k < 2000; ++k) {
    // Values spread over many magnitudes.
    const double v = (rng.uniform(Stream::kTieBreak, k) - 0.5) * std::pow(10.0, static_cast<int>(k % 40) - 20);
    const auto text = format_double(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
    CHECK(text.size() <= 24);
  }
}

TEST_CASE("csv quoting and column count") {
  CHECK(csv_field("aB") == "aB");
  CHECK(csv_field("(a,b)") == "\"(a,b)\"");
  CHECK(csv_field("say \"x\"") == "\"say \"\"x\"\"\"");
  TempDir tmp("csv");
  CsvWriter w(tmp.path / "t.csv", {"a", "b"});
  w.cell(1).cell(0.5);
  w.end();
  w.cell(1);
  CHECK_THROWS_AS(w.end(), InvariantViolation);
}

TEST_CASE("parallel_for visits each index once and reports the least failure") {
  for (int threads : {1, 2, 5}) {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    try {
      parallel_for(50, threads, [](std::size_t i) {
        if (i % 7 == 3) throw InputError(std::to_string(i));
      });
      FAIL("expected a failure");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()) == "3");
    }
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("schedule subcommand writes the breakpoint table") {
  TempDir tmp("schedule");
  ExperimentConfig cfg;
  cfg.output = tmp.path.string();
  const auto r = run("schedule", cfg);
  CHECK(r.ok());
  const auto rows = read_csv(tmp.path / "schedule.csv");
  REQUIRE(rows.size() > 3);
  CHECK(rows[0] == std::vector<std::string>{"n", "f_n", "g_n", "segment_index", "slope"});
  CHECK(rows[1][1] == "0");
  CHECK(rows[2][1] == "0");
  CHECK(rows[3][0] == "2");
  CHECK(rows[3][1] == "2");

  std::ifstream in(tmp.path / "manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  CHECK(manifest["version"] == version());
  CHECK(manifest["config"]["c"] == 1.0);
  CHECK(manifest.contains("started_at"));
  CHECK(manifest["files"].size() == r.files.size());
  for (const auto& f : r.files) CHECK(fs::exists(tmp.path / f));

  std::ifstream plot(tmp.path / "plot_schedule.dat");
  std::string header;
  std::getline(plot, header);
  CHECK(header == "# series x y y_err");
}

TEST_CASE("diamond subcommand: T = 0 rows are empty corner sets") {
  TempDir tmp("diamond");
  auto cfg = small(tmp.path);
  const auto r = run("diamond", cfg);
  CHECK(r.ok());
  const auto rows = read_csv(tmp.path / "corners.csv");
  std::size_t zero = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][1] == "0") {
      CHECK(rows[i][2] == "0");
      CHECK(rows[i][4] == "0");
      ++zero;
    }
  }
  CHECK(zero == 6);
  const auto vols = read_csv(tmp.path / "volumes.csv");
  // r = 2 on F2 x F2.
  CHECK(vols[2][1] == "2");
  CHECK(vols[2][3] == "33");
  CHECK(vols[2][4] == "33");
}

TEST_CASE("amenable factors need a linear schedule and an explicit c") {
  TempDir tmp("amenable");
  auto cfg = small(tmp.path);
  cfg.first = GroupSpec::lattice(1);
  cfg.second = GroupSpec::lattice(1);
  CHECK_THROWS_AS(run("schedule", cfg), InputError);
  cfg.c = 1.0;
  CHECK_THROWS_AS(run("schedule", cfg), InputError);
  cfg.schedule = ScheduleKind::kLinear;
  CHECK(run("schedule", cfg).ok());
  cfg.first = GroupSpec::cyclic(4);
  CHECK_THROWS_AS(run("growth", cfg), InputError);
}

TEST_CASE("subcommands are deterministic across thread counts") {
  TempDir a("det-a");
  TempDir b("det-b");
  for (const char* sub : {"process", "graphing", "prop13"}) {
    CAPTURE(sub);
    auto ca = small(a.path / sub);
    auto cb = small(b.path / sub);
    ca.threads = 1;
    cb.threads = 4;
    const auto ra = run(sub, ca);
    const auto rb = run(sub, cb);
    CHECK(ra.ok());
    CHECK(ra.files == rb.files);
    const auto same = compare_outputs(a.path / sub, b.path / sub);
    CHECK_MESSAGE(same.pass, same.detail);
  }
  // A different master seed changes the sampled data.
  auto cc = small(b.path / "other");
  cc.master_seed = 2;
  run("process", cc);
  CHECK_FALSE(compare_outputs(a.path / "process", b.path / "other").pass);
}

TEST_CASE("graphing subcommand artifacts") {
  TempDir tmp("graphing");
  const auto r = run("graphing", small(tmp.path));
  CHECK(r.ok());
  std::ifstream in(tmp.path / "cost_report.json");
  const auto reports = nlohmann::json::parse(in);
  REQUIRE(reports.size() == 4);
  for (const auto& rep : reports) {
    REQUIRE(rep["stages"].size() == 3);
    for (const auto& st : rep["stages"]) {
      for (const char* key : {"stage", "half_degree_mean", "half_degree_se", "lambda_hat", "pi5_bound_lhs",
                              "pi5_bound_rhs", "boundary_deficit", "seeds"}) {
        CHECK(st.contains(key));
      }
    }
  }
  const auto edges = read_csv(tmp.path / "edges.csv");
  std::set<std::string> stages;
  for (std::size_t i = 1; i < edges.size(); ++i) stages.insert(edges[i][0]);
  CHECK(stages.count("pi1") == 1);
  CHECK(stages.count("pi3") == 1);
}

TEST_CASE("compare_outputs ignores the manifest only") {
  TempDir a("cmp-a");
  TempDir b("cmp-b");
  fs::create_directories(a.path / "x");
  fs::create_directories(b.path / "x");
  for (const auto& p : {a.path, b.path}) {
    std::ofstream(p / "x" / "data.csv") << "1,2\n";
  }
  std::ofstream(a.path / "manifest.json") << "{\"t\": 1}";
  std::ofstream(b.path / "manifest.json") << "{\"t\": 2}";
  CHECK(compare_outputs(a.path, b.path).pass);
  std::ofstream(b.path / "x" / "data.csv") << "1,3\n";
  CHECK_FALSE(compare_outputs(a.path, b.path).pass);
  std::ofstream(b.path / "x" / "data.csv") << "1,2\n";
  std::ofstream(b.path / "extra.csv") << "\n";
  CHECK_FALSE(compare_outputs(a.path, b.path).pass);
}

TEST_CASE("criterion lines") {
  const Check c{"growth oracles", true, "detail", 0.25};
  CHECK(format_check_line(1, c) == "criterion 1: PASS growth oracles (detail) [0.25s]");
  CHECK_THROWS_AS(evaluate_criterion(11, 1, 1), InputError);
  const auto c2 = evaluate_criterion(2, 1, 1);
  CHECK(c2.pass);
  CHECK(c2.detail.find("n=2:49/49") != std::string::npos);
}
