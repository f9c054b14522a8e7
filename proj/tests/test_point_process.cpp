#include <cmath>

#include "doctest.h"
#include "horolab/errors.hpp"
#include "horolab/point_process.hpp"

using namespace horolab;

namespace {

struct F2Process {
  Group g{GroupSpec::free(2)};
  GrowthSeries series = counted_growth_series(GroupSpec::free(2), 36);
  SlopeSchedule schedule = build_schedule(series, series, 1.0, 30);

  ProcessSpace space(double radius, int n, std::optional<ProductPoint> shift = std::nullopt) const {
    return ProcessSpace(g, g, series, series, schedule, 1.0, radius, n, shift);
  }
};

}  // namespace

TEST_CASE("process space geometry") {
  F2Process f;
  const auto space = f.space(3, 2);
  CHECK(space.r() == 2);
  CHECK(space.volume() == 33);
  CHECK(space.outer_radius() == 7.0);
  // W+ is the rho ball of radius 7.
  CHECK(space.outer_size() == ball_slice_volume(f.series, f.series, 1.0, 7).total);
  // Every window point is covered by exactly v''_n centers.
  for (auto count : covering_counts(space)) CHECK(count == 33);
}

TEST_CASE("process members match the diamond definition") {
  F2Process f;
  const auto space = f.space(3, 2);
  for (std::size_t i = 0; i < space.outer_size(); i += 97) {
    const ProductPoint center{space.first_ball().element(static_cast<std::size_t>(space.outer_first(i))),
                              space.second_ball().element(static_cast<std::size_t>(space.outer_second(i)))};
    const auto expected = diamond_members(f.schedule, space.r(), center, space.window());
    CHECK(space.members(i) == expected);
  }
}

TEST_CASE("sampling is deterministic and Bernoulli(1) takes every center") {
  F2Process f;
  const auto space = f.space(3, 2);
  const auto a = sample_diamond_process(space, 42);
  const auto b = sample_diamond_process(space, 42);
  REQUIRE(a.diamonds.size() == b.diamonds.size());
  for (std::size_t i = 0; i < a.diamonds.size(); ++i) {
    CHECK(a.diamonds[i].key == b.diamonds[i].key);
    CHECK(a.diamonds[i].mark == b.diamonds[i].mark);
  }
  CHECK(sample_diamond_process(space, 43).centers != a.centers);

  const auto all = sample_diamond_process(space, 1, 1.0);
  CHECK(all.centers == space.outer_size());
  const auto inc = incidence_stats(space, all);
  for (auto c : inc.counts) CHECK(c == 33);

  const auto none = sample_diamond_process(space, 1, 0.0);
  CHECK(none.diamonds.empty());
  for (auto c : incidence_stats(space, none).counts) CHECK(c == 0);
  CHECK_THROWS_AS(sample_diamond_process(space, 1, 1.5), InputError);
}

TEST_CASE("incidence over seeds matches Binomial(v'', 1/v'')") {
  F2Process f;
  const auto space = f.space(4, 2);
  const int seeds = 200;
  const std::size_t probe = 0;  // o''
  double sum = 0.0;
  double sq = 0.0;
  double density = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const auto process = sample_diamond_process(space, run_seed(2024, static_cast<std::uint64_t>(s)));
    const auto inc = incidence_stats(space, process);
    CHECK(inc.expected_mean == doctest::Approx(1.0));
    sum += inc.counts[probe];
    sq += static_cast<double>(inc.counts[probe]) * inc.counts[probe];
    density += static_cast<double>(process.centers) / static_cast<double>(space.outer_size());
  }
  const double mean = sum / seeds;
  const double var = sq / seeds - mean * mean;
  const double p = 1.0 / 33.0;
  const double expected_var = 33 * p * (1 - p);
  CHECK(std::fabs(mean - 1.0) <= 3 * std::sqrt(expected_var / seeds));
  // Variance of a sample variance for Binomial(33, 1/33) is about (mu4 - sigma^4)/N.
  CHECK(std::fabs(var - expected_var) <= 3 * std::sqrt(2.2 / seeds));
  CHECK(std::fabs(density / seeds - p) <= 3 * std::sqrt(p * (1 - p) / (seeds * static_cast<double>(space.outer_size()))) + 1e-3);
}

TEST_CASE("translated windows give the same statistics") {
  F2Process f;
  const ProductPoint shift{f.g.canon("abAb"), f.g.canon("BBa")};
  const auto here = f.space(3, 2);
  const auto there = f.space(3, 2, shift);
  double m1 = 0;
  double m2 = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    m1 += incidence_stats(here, sample_diamond_process(here, run_seed(5, static_cast<std::uint64_t>(s)))).mean;
    m2 += incidence_stats(there, sample_diamond_process(there, run_seed(5, static_cast<std::uint64_t>(s)))).mean;
  }
  // Means per window are averages of |W| dependent counts; the spread is well under 0.2.
  CHECK(std::fabs(m1 / seeds - 1.0) < 0.1);
  CHECK(std::fabs(m2 / seeds - 1.0) < 0.1);
}

TEST_CASE("corner event probabilities") {
  F2Process f;
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < 300; ++s) seeds.push_back(run_seed(77, static_cast<std::uint64_t>(s)));
  const auto table = corner_event_probability(f.g, f.g, f.schedule, f.series, f.series, 1, 6, {0, 1}, seeds);
  REQUIRE(table.rows.size() == 12);
  for (const auto& row : table.rows) {
    CAPTURE(row.n);
    CAPTURE(row.T);
    if (row.T == 0) {
      CHECK(row.exact == 0.0L);
      continue;
    }
    REQUIRE(row.empirical.has_value());
    CHECK(std::fabs(*row.empirical - static_cast<double>(row.exact)) <=
          3 * std::sqrt(static_cast<double>(row.exact * (1 - row.exact)) / 300) + 1e-9);
  }
  // Synthetic |A| = v'': 1 - (1 - 1/v)^v near 1 - 1/e.
  CHECK(static_cast<double>(miss_complement(1.0L / 500, 500)) == doctest::Approx(1 - std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("hit probability lower bound") {
  F2Process f;
  for (int n = 1; n <= 12; ++n) {
    const auto zero = hit_probability(f.schedule, f.series, f.series, n, 0);
    CHECK(zero.count == zero.volume);
    long double prev = 0;
    for (int T = 1; T <= 4; ++T) {
      const auto row = hit_probability(f.schedule, f.series, f.series, n, T);
      CHECK(row.holds);
      CHECK(row.ratio >= prev);
      prev = row.ratio;
    }
  }
}
