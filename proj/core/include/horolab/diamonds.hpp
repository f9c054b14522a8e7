#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "horolab/growth.hpp"
#include "horolab/horoboundary.hpp"
#include "horolab/product_metric.hpp"
#include "horolab/slope_schedule.hpp"

namespace horolab {

/// (y,y') lies in the diamond of radius r around (x,x') iff d(x,y) = r - t
/// with 0 <= t <= r and d'(x',y') <= f(t).
inline bool in_diamond(const SlopeSchedule& s, int r, int d, int d_second) {
  return d <= r && d_second <= s.f_at(r - d);
}

/// v''_n for r_n = r: sum over t of s_{r-t} v'_{f(t)}.
std::uint64_t diamond_volume_at(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second, int r);
std::uint64_t diamond_volume(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second, int n);

/// Window indices of the points of D(center) of radius r, in window order.
std::vector<std::int32_t> diamond_members(const SlopeSchedule& s, int r, const ProductPoint& center,
                                          const ProductWindow& window);

/// Full diamond by enumeration of factor balls, sorted in ElementOrder.
std::vector<ProductPoint> enumerate_diamond(const SlopeSchedule& s, int r, const ProductPoint& center,
                                            const Group& first, const Group& second,
                                            std::size_t cap = kDefaultEnumerationCap);

struct CornerRow {
  int n = 0;
  int T = 0;
  int r = 0;
  int r_prime = 0;
  std::uint64_t count = 0;      // |A_{n,T}|
  long double bound = 0;        // M^T (v_r v'_T + v_T v'_{r'})
  std::uint64_t volume = 0;     // v''_n
  long double ratio = 0;        // count / volume
  long double probability = 0;  // 1 - (1 - 1/v''_n)^count
};

/// Centers (x,x') with (d(o,x) < r+T and d'(o',x') < T) or
/// (d'(o',x') < r'+T and d(o,x) < T), counted by inclusion-exclusion.
CornerRow corner_count(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second, int n, int T);

/// 1 - (1 - p)^k, computed stably.
long double miss_complement(long double p, long double k);

struct DominanceRow {
  int n = 0;
  int r = 0;
  int r_prime = 0;
  std::uint64_t volume = 0;
  std::uint64_t max_factor = 0;  // max{v_{r_n}, v'_{r'_n}}
  long double ratio = 0;
  long double lower_bound = 0;   // (eps / M^2) n
  bool holds = true;
};

std::vector<DominanceRow> growth_dominance(const SlopeSchedule& s, const GrowthSeries& first,
                                           const GrowthSeries& second, int n_first, int n_last);

struct SandwichRow {
  int n = 0;
  int r = 0;
  bool vacuous = false;
  double delta = 0.0;
  std::size_t members = 0;
  std::size_t lower_violations = 0;  // points of HB(delta - 2/c) outside D
  std::size_t upper_violations = 0;  // points of D outside HB(delta + 1/c)
  bool holds() const { return lower_violations == 0 && upper_violations == 0; }
};

/// HB(theta'', delta - 2/c) n W  subset  D n W  subset  HB(theta'', delta + 1/c) n W
/// with delta the max of theta'' over D n W.
SandwichRow sandwich_check(const SlopeSchedule& s, int n, const ProductPoint& center, const ProductWindow& window,
                           const ProductHorofunction& theta);

struct SandwichReport {
  std::vector<SandwichRow> rows;
  std::optional<int> first_holding;  // least n after which every non-vacuous row holds
  std::size_t total_violations = 0;
  std::size_t vacuous_rows = 0;
};

/// Throws InputError when every tested diamond misses the window.
SandwichReport sandwich_report(const SlopeSchedule& s, int n_first, int n_last,
                               const std::function<ProductPoint(int)>& center_of, const ProductWindow& window,
                               const ProductHorofunction& theta);

}  // namespace horolab
