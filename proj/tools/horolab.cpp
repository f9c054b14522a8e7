#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "horolab/errors.hpp"
#include "horolab/lab.hpp"

namespace {

enum Exit { kOk = 0, kInvariant = 1, kConfig = 2, kResource = 3 };

int execute(const std::string& sub, const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out, std::optional<int> threads, std::optional<int> seeds) {
  auto cfg = config_path.empty() ? horolab::ExperimentConfig{} : horolab::ExperimentConfig::load(config_path);
  if (seed) cfg.master_seed = *seed;
  if (!out.empty()) cfg.output = out;
  if (threads) cfg.threads = *threads;
  if (seeds) cfg.seeds = *seeds;

  const auto result = horolab::run(sub, cfg);
  std::cout << sub << ": wrote " << result.files.size() << " files to " << result.directory.string() << "\n";
  int failed = 0;
  for (const auto& c : result.checks) {
    std::cout << (c.pass ? "  ok    " : "  FAIL  ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    failed += !c.pass;
  }
  if (failed) {
    std::cerr << "invariant violated: " << failed << " check(s) failed\n";
    return kInvariant;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"horolab: diamond processes, horofunctions and graphings on products of groups"};
  app.set_version_flag("--version", std::string(horolab::version()));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::optional<int> seeds;
  app.add_option("-c,--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--seeds", seeds, "number of Monte Carlo seeds");

  app.add_subcommand("print-config", "print the default config as JSON")->fallthrough();
  const std::map<std::string, std::string> about = {
      {"growth", "growth series by BFS and closed form"},
      {"schedule", "slope schedule and almost-linearity"},
      {"diamond", "diamond volumes, corners, dominance, sandwich"},
      {"process", "diamond process sampling, incidence, corner and hit events"},
      {"graphing", "full graphing pipeline and cost report"},
      {"touching", "touching-path traces between horoballs"},
      {"prop13", "coset-line baseline with percolation"},
      {"all", "every subcommand plus the acceptance criteria"}};
  for (const auto& name : horolab::subcommands()) app.add_subcommand(name, about.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    if (sub->get_name() == "print-config") {
      std::cout << horolab::ExperimentConfig{}.to_json().dump(2) << "\n";
      return kOk;
    }
    return execute(sub->get_name(), config_path, seed, out, threads, seeds);
  } catch (const horolab::InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const horolab::ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kResource;
  } catch (const horolab::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
}
