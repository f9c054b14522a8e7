#pragma once

#include <cstdint>
#include <vector>

#include "horolab/group.hpp"

namespace horolab {

/*!
 * Ball and sphere volumes of a Cayley graph up to a horizon N.
 *
 * volumes[n] = |B_n(o)|, spheres[n] = volumes[n] - volumes[n-1] (spheres[0] = 1),
 * rate_estimates[n] = volumes[n]^(1/n) for n >= 1 (rate_estimates[0] = 1 by
 * convention).
 */
struct GrowthSeries {
  std::vector<std::uint64_t> volumes;
  std::vector<std::uint64_t> spheres;
  std::vector<double> rate_estimates;
  // min over 1 <= n <= N of s_n / v_n
  double eps_nonamen = 0.0;
  int generator_count = 0;

  int horizon() const { return static_cast<int>(volumes.size()) - 1; }

  /// v_n, with v_n = 0 for n < 0. Throws InputError beyond the horizon.
  std::uint64_t volume(int n) const;
  std::uint64_t sphere(int n) const;

  double rate_at_horizon() const { return rate_estimates.back(); }
};

bool is_infinite(const GroupSpec& spec);
/// Free groups of rank >= 2, free products other than Z/2 * Z/2, and direct
/// products with a nonamenable factor.
bool is_nonamenable(const GroupSpec& spec);

/// Build a series from sphere counts (s_0 must be 1).
GrowthSeries series_from_spheres(std::vector<std::uint64_t> spheres, int generator_count);

/// Volumes by breadth-first enumeration. Only three BFS levels are kept in
/// memory, but the total ball size is still bounded by `cap`.
GrowthSeries growth_series(const Group& group, int horizon, std::size_t cap = kDefaultEnumerationCap);

/// Volumes from closed forms and growth-series algebra (no enumeration):
/// free groups, cyclic groups, lattices, direct products (sphere convolution)
/// and free products (1/S = sum 1/S_i - (m - 1)).
GrowthSeries counted_growth_series(const GroupSpec& spec, int horizon);

/// Growth rate used for the slope c: the exact value for built-in families,
/// the horizon estimate v_N^(1/N) otherwise.
double growth_rate(const Group& group, const GrowthSeries& series);

/// Throws InvariantViolation naming the first failed property: strictly
/// increasing volumes (infinite groups), submultiplicativity, non-increasing
/// v_n^(1/n), and v_{n+1} <= (|S| + 1) v_n.
void check_growth_invariants(const GrowthSeries& series, bool infinite);

}  // namespace horolab
