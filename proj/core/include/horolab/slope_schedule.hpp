#pragma once

#include <optional>
#include <vector>

#include "horolab/growth.hpp"

namespace horolab {

/// Tolerance used when flooring g; g hits integers only up to rounding.
inline constexpr long double kFloorEpsilon = 1e-9L;

struct ScheduleSegment {
  int index = 0;        // 0, 1, 2, ... alternating down/up
  bool down = true;     // slope c - c/(n+1) (down) or c + c/(n+1) (up)
  long double slope = 0;
  int start = 0;        // breakpoint the segment starts from
  int end = 0;          // crossing radius, or last radius reached
  bool completed = false;
};

/*!
 * Almost-linear integer function f = floor(g) with breakpoints r_j where
 * v'_{f(r_j)} / v_{r_j} crosses 1 alternately from above and below.
 */
struct SlopeSchedule {
  double c = 1.0;
  int M = 1;
  int horizon = 0;
  bool linear = false;
  bool truncated = false;

  std::vector<int> f;              // f[x], 0 <= x <= horizon
  std::vector<long double> g;
  std::vector<int> segment_of;     // segment containing x (x = 0 maps to 0)
  std::vector<int> r;              // breakpoints r_j
  std::vector<int> r_prime;        // f(r_j)
  std::vector<long double> ratios; // v'_{r'_j} / v_{r_j} (empty for linear schedules)
  std::vector<ScheduleSegment> segments;

  int breakpoints() const { return static_cast<int>(r.size()); }
  /// f(t); throws InputError beyond the horizon.
  int f_at(int t) const;
  /// r_n; throws InputError when the schedule has fewer breakpoints.
  int radius(int n) const;
  int radius_prime(int n) const;
};

/// Alternating-slope construction. Stops (truncated) when the horizon or the
/// growth data runs out mid-segment; throws DivergenceError when a segment
/// exceeds `segment_cap` radii without crossing.
SlopeSchedule build_schedule(const GrowthSeries& first, const GrowthSeries& second, double c, int horizon,
                             int segment_cap = 10'000);

/// f(t) = floor(ct) with r_j = j. M is the growth constant used by the corner
/// bounds; pass max generator count + 1 when those are evaluated.
SlopeSchedule linear_schedule(double c, int horizon, int M = 1);

/// f(0) = 0, f nondecreasing, f = floor(g), crossing directions, and the
/// ratio window [1/M, M^{2c}]. Throws InvariantViolation.
void check_schedule(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second);

struct AlmostLinearRow {
  int m = 0;
  std::optional<int> N;          // least N with |f(n+m) - f(n) - cm| <= 1 for n in [N, horizon - m]
  double max_deviation = 0.0;    // over all n
  double tail_deviation = 0.0;   // over n >= N (0 when N is missing)
};

std::vector<AlmostLinearRow> verify_almost_linear(const SlopeSchedule& s, int m_max);

}  // namespace horolab
