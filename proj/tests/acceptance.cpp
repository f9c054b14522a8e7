// Runs `all` twice with the same master seed: criteria 1-10 come from the
// first run, criterion 11 compares the two output trees.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <unistd.h>

#include "horolab/acceptance.hpp"
#include "horolab/lab.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  horolab::ExperimentConfig cfg;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--threads") cfg.threads = std::atoi(argv[i + 1]);
    if (flag == "--seed") cfg.master_seed = std::strtoull(argv[i + 1], nullptr, 10);
  }
  const fs::path root = fs::temp_directory_path() / ("horolab-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);

  cfg.output = (root / "a").string();
  const auto first = horolab::run("all", cfg);
  const std::size_t n = first.checks.size();
  if (n < 10) {
    std::cerr << "expected 10 criteria, got " << n << "\n";
    return 1;
  }
  int failed = 0;
  for (int id = 1; id <= 10; ++id) {
    const auto& c = first.checks[n - 10 + static_cast<std::size_t>(id - 1)];
    std::cout << horolab::format_check_line(id, c) << std::endl;
    failed += !c.pass;
  }

  cfg.output = (root / "b").string();
  horolab::run("all", cfg);
  const auto same = horolab::compare_outputs(root / "a", root / "b");
  std::cout << horolab::format_check_line(11, same) << std::endl;
  failed += !same.pass;

  fs::remove_all(root);
  std::cout << (horolab::kCriteria - failed) << "/" << horolab::kCriteria << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
