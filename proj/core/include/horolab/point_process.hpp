#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "horolab/diamonds.hpp"
#include "horolab/group.hpp"
#include "horolab/growth.hpp"
#include "horolab/product_metric.hpp"
#include "horolab/random.hpp"
#include "horolab/slope_schedule.hpp"

namespace horolab {

/*!
 * Everything about a diamond process that does not depend on the seed: the
 * window W, the center window W+ (rho ball of radius R + r_n + r'_n/c), the
 * diamond offsets, and the keys used for the counter-based randomness.
 *
 * A nontrivial `shift` g'' keys every local point x'' by g''x'', which is the
 * translated copy of the same experiment.
 */
class ProcessSpace {
 public:
  ProcessSpace(Group first, Group second, const GrowthSeries& first_series, const GrowthSeries& second_series,
               SlopeSchedule schedule, double c, double window_radius, int n,
               std::optional<ProductPoint> shift = std::nullopt, std::size_t cap = kDefaultEnumerationCap);

  int n() const { return n_; }
  int r() const { return r_; }
  int r_prime() const { return r_prime_; }
  double c() const { return c_; }
  std::uint64_t volume() const { return volume_; }
  double outer_radius() const { return outer_radius_; }
  std::size_t outer_size() const { return outer_first_.size(); }
  const SlopeSchedule& schedule() const { return schedule_; }
  const Group& first() const { return first_; }
  const Group& second() const { return second_; }

  const ProductWindow& window() const { return *window_; }
  std::shared_ptr<const ProductWindow> window_ptr() const { return window_; }
  const CayleyBall& first_ball() const { return *ball1_; }
  const CayleyBall& second_ball() const { return *ball2_; }

  std::int32_t outer_first(std::size_t i) const { return outer_first_[i]; }
  std::int32_t outer_second(std::size_t i) const { return outer_second_[i]; }
  std::uint64_t outer_key(std::size_t i) const { return outer_keys_[i]; }

  /// Window indices of the diamond around the i-th W+ point.
  std::vector<std::int32_t> members(std::size_t outer_index) const;

  /// Ball index of the key used for a factor ball element (shift aware).
  std::uint64_t first_key(std::size_t ball_index) const { return key1_[ball_index]; }
  std::uint64_t second_key(std::size_t ball_index) const { return key2_[ball_index]; }
  /// Key of window point k.
  std::uint64_t window_key(std::size_t k) const;

 private:
  Group first_;
  Group second_;
  SlopeSchedule schedule_;
  double c_;
  int n_;
  int r_;
  int r_prime_;
  std::uint64_t volume_;
  double outer_radius_;
  std::shared_ptr<const CayleyBall> ball1_;
  std::shared_ptr<const CayleyBall> ball2_;
  std::shared_ptr<const ProductWindow> window_;
  std::vector<std::uint64_t> key1_;
  std::vector<std::uint64_t> key2_;
  std::vector<std::int32_t> outer_first_;
  std::vector<std::int32_t> outer_second_;
  std::vector<std::uint64_t> outer_keys_;
  // Diamond offsets: first-factor words with the second radius they allow.
  std::vector<Word> offset_first_;
  std::vector<int> offset_allowance_;
  std::vector<Word> offset_second_;  // sorted by length
  int box_first_;   // centers beyond these radii cannot reach W
  int box_second_;
};

struct PointedDiamond {
  std::size_t outer_index = 0;  // into the ProcessSpace center window
  std::uint64_t key = 0;
  double mark = 0.0;
  std::vector<std::int32_t> members;  // window indices, increasing
};

struct DiamondProcess {
  int n = 0;
  double p = 0.0;  // center probability
  std::uint64_t seed = 0;
  std::size_t centers = 0;  // |Phi_n n W+|, including diamonds that miss W
  std::vector<PointedDiamond> diamonds;  // only those meeting W, in W+ order
};

/// Bernoulli(1/v''_n) centers on W+ (or the override), marks from u''_2.
DiamondProcess sample_diamond_process(const ProcessSpace& space, std::uint64_t seed,
                                      std::optional<double> p_override = std::nullopt);

struct IncidenceStats {
  std::vector<std::uint32_t> counts;  // per window point
  double mean = 0.0;
  double variance = 0.0;
  double expected_mean = 0.0;  // covering count * p
};

IncidenceStats incidence_stats(const ProcessSpace& space, const DiamondProcess& process);

/// Number of W+ centers whose diamond contains window point k (enumeration).
std::vector<std::uint64_t> covering_counts(const ProcessSpace& space);

struct CornerEventRow {
  int n = 0;
  int T = 0;
  std::uint64_t corner_count = 0;
  std::uint64_t volume = 0;
  long double exact = 0;       // 1 - (1 - 1/v''_n)^{|A|}
  std::optional<double> empirical;
  std::optional<double> standard_error;
};

struct CornerEventTable {
  std::vector<CornerEventRow> rows;
  /// Per T, the length of the longest strictly decreasing tail of the exact
  /// probabilities (in breakpoint order).
  std::vector<int> decreasing_tail;
};

/// Exact corner-event probabilities; the empirical estimate samples the
/// Bernoulli field on A_{n,T} when the corner set has at most `empirical_cap`
/// points and the factor balls fit the enumeration cap.
CornerEventTable corner_event_probability(const Group& first, const Group& second, const SlopeSchedule& s,
                                          const GrowthSeries& first_series, const GrowthSeries& second_series,
                                          int n_first, int n_last, const std::vector<int>& Ts,
                                          const std::vector<std::uint64_t>& seeds,
                                          std::uint64_t empirical_cap = 200'000);

struct HitRow {
  int n = 0;
  int T = 0;
  std::uint64_t count = 0;   // |E'_{n,T}|
  std::uint64_t volume = 0;  // v''_n
  long double ratio = 0;
  long double bound = 0;     // (1 - eps')^{-T}
  bool holds = true;
};

/// |E'_{n,T}| = sum_t s_t v'_{f(r_n - t) + T} against (1 - eps')^{-T}.
HitRow hit_probability(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second, int n, int T);

}  // namespace horolab
