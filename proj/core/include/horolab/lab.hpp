#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "horolab/group.hpp"

namespace horolab {

const char* version();

enum class ScheduleKind { kConstructed, kLinear };

struct ExperimentConfig {
  GroupSpec first = GroupSpec::free(2);
  GroupSpec second = GroupSpec::free(2);
  std::optional<double> c;  // default: log a / log a'
  ScheduleKind schedule = ScheduleKind::kConstructed;
  int horizon = 24;
  double window_radius = 5.0;
  double margin = 1.0;
  int n_first = 1;
  int n_last = 12;
  int graph_n = 3;
  std::vector<int> T{0, 1, 2, 3};
  std::vector<double> eps{0.01, 0.05, 0.1, 0.2};
  double cost_eps = 0.05;
  double kernel_radius = 0.0;  // 0: twice the window radius
  int seeds = 200;
  int corner_seeds = 100;  // Monte Carlo runs for empirical corner events
  std::uint64_t master_seed = 1;
  std::string output = "horolab-out";
  int threads = 0;  // 0: hardware concurrency
  std::size_t cap = kDefaultEnumerationCap;

  /// Unknown keys and wrong types are InputError.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// Range checks only; group-dependent checks happen when the run resolves c.
  void validate() const;
};

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
  double seconds = 0.0;
};

struct RunResult {
  std::string subcommand;
  std::filesystem::path directory;
  std::vector<std::string> files;  // relative to directory, in write order
  std::vector<Check> checks;
  nlohmann::json resolved;  // config with c and the kernel radius filled in

  bool ok() const;
};

const std::vector<std::string>& subcommands();

/// Validates the config, writes the artifacts and manifest.json under
/// config.output. Library exceptions propagate.
RunResult run(const std::string& subcommand, const ExperimentConfig& config);

/// body(i) for i < n on up to `threads` workers; each index runs exactly once.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace horolab
