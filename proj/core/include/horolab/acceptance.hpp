#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "horolab/lab.hpp"

namespace horolab {

inline constexpr int kCriteria = 11;

/// Criteria 1 to 10 at their fixed sizes; only the seeds and the worker count
/// come from the caller. `detail` is deterministic, timings go to `seconds`.
Check evaluate_criterion(int id, std::uint64_t master_seed, int threads);
std::vector<Check> evaluate_criteria(std::uint64_t master_seed, int threads);

/// Byte-for-byte comparison of two output trees, ignoring manifest.json.
Check compare_outputs(const std::filesystem::path& a, const std::filesystem::path& b);

/// "criterion N: PASS|FAIL name (detail) [seconds]"
std::string format_check_line(int id, const Check& check);

}  // namespace horolab
