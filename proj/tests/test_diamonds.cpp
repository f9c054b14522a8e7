#include <set>

#include "doctest.h"
#include "horolab/diamonds.hpp"
#include "horolab/errors.hpp"

using namespace horolab;

namespace {

struct F2Setup {
  Group g{GroupSpec::free(2)};
  GrowthSeries series = counted_growth_series(GroupSpec::free(2), 36);
  SlopeSchedule schedule = build_schedule(series, series, 1.0, 30);
};

// Membership by brute force over B_r x B'_{f(r)}, using the raw definition
// with an explicit search over t.
std::size_t brute_diamond(const SlopeSchedule& s, int r, const Group& g1, const Group& g2) {
  const CayleyBall b1(g1, r);
  const CayleyBall b2(g2, s.f_at(r));
  std::size_t count = 0;
  for (std::size_t i = 0; i < b1.size(); ++i) {
    for (std::size_t j = 0; j < b2.size(); ++j) {
      const int d = g1.length(b1.element(i));
      const int d2 = g2.length(b2.element(j));
      for (int t = 0; t <= r; ++t) {
        if (d == r - t && d2 <= s.f_at(t)) {
          ++count;
          break;
        }
      }
    }
  }
  return count;
}

// Corner centers counted one by one from the two clauses.
std::uint64_t brute_corners(const Group& g, int r, int rp, int T) {
  if (T == 0) return 0;
  const CayleyBall b1(g, r + T);
  const CayleyBall b2(g, rp + T);
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < b1.size(); ++i) {
    for (std::size_t j = 0; j < b2.size(); ++j) {
      const int d = b1.distance(i);
      const int d2 = b2.distance(j);
      if ((d < r + T && d2 < T) || (d2 < rp + T && d < T)) ++count;
    }
  }
  return count;
}

}  // namespace

TEST_CASE("perturbed diamond volumes") {
  F2Setup f;
  CHECK(diamond_volume_at(f.schedule, f.series, f.series, 2) == 33);
  CHECK(diamond_volume_at(f.schedule, f.series, f.series, 0) == 1);
  for (int r = 0; r <= 5; ++r) {
    CAPTURE(r);
    const auto v = diamond_volume_at(f.schedule, f.series, f.series, r);
    CHECK(v == brute_diamond(f.schedule, r, f.g, f.g));
    CHECK(v == enumerate_diamond(f.schedule, r, {f.g.identity(), f.g.identity()}, f.g, f.g).size());
  }
  const Group z(GroupSpec::lattice(1));
  const auto zs = counted_growth_series(GroupSpec::lattice(1), 30);
  const auto lin = linear_schedule(1.0, 10);
  CHECK(diamond_volume_at(lin, zs, zs, 2) == 13);
  CHECK(brute_diamond(lin, 2, z, z) == 13);
  CHECK_THROWS_AS(enumerate_diamond(f.schedule, 5, {f.g.identity(), f.g.identity()}, f.g, f.g, 100), ResourceError);
}

TEST_CASE("diamond members in a window") {
  F2Setup f;
  auto b = std::make_shared<const CayleyBall>(f.g, 5);
  const ProductWindow w(b, b, 1.0, 5.0);
  const ProductPoint o{f.g.identity(), f.g.identity()};
  CHECK(diamond_members(f.schedule, 2, o, w).size() == 33);
  CHECK(diamond_members(f.schedule, 0, o, w).size() == 1);
  // Far center: disjoint from the window.
  const ProductPoint far{f.g.canon("aaaaaaaaaaaa"), f.g.canon("bbbbbbbbbbbb")};
  CHECK(diamond_members(f.schedule, 2, far, w).empty());

  // Translation invariance: |D(x) n xW| does not depend on x.
  const auto reference = diamond_members(f.schedule, 3, o, w).size();
  const ProductMetric m(f.g, f.g, 1.0);
  for (const char* word : {"ab", "BAb", "a"}) {
    const ProductPoint x{f.g.canon(word), f.g.canon("Ba")};
    const auto full = enumerate_diamond(f.schedule, 3, x, f.g, f.g);
    std::size_t inside = 0;
    for (const auto& p : full) {
      if (within_radius(m.rho(x, p), 5.0)) ++inside;
    }
    CHECK(inside == reference);
  }

  // Members agree with the enumeration restricted to the window.
  const ProductPoint x{f.g.canon("ab"), f.g.canon("B")};
  const auto members = diamond_members(f.schedule, 3, x, w);
  std::set<std::int64_t> expected;
  for (const auto& p : enumerate_diamond(f.schedule, 3, x, f.g, f.g)) {
    const auto k = w.find(p);
    if (k >= 0) expected.insert(k);
  }
  CHECK(std::set<std::int64_t>(members.begin(), members.end()) == expected);
}

TEST_CASE("corner counts") {
  F2Setup f;
  for (int n = 1; n <= 3; ++n) {
    for (int T = 0; T <= 2; ++T) {
      CAPTURE(n);
      CAPTURE(T);
      const auto row = corner_count(f.schedule, f.series, f.series, n, T);
      CHECK(row.count == brute_corners(f.g, row.r, row.r_prime, T));
      CHECK(static_cast<long double>(row.count) <= row.bound);
      if (T == 0) CHECK(row.probability == 0.0L);
    }
  }
  // Along breakpoints of one parity the ratio decays; consecutive
  // breakpoints alternate (f lags at odd radii).
  for (int T = 1; T <= 2; ++T) {
    for (int n = 3; n + 2 <= 30; ++n) {
      const auto row = corner_count(f.schedule, f.series, f.series, n, T);
      const auto next = corner_count(f.schedule, f.series, f.series, n + 2, T);
      CHECK(row.ratio > 0);
      CHECK(next.ratio < row.ratio);
      CHECK(next.probability < row.probability);
    }
  }
  CHECK(corner_count(f.schedule, f.series, f.series, 4, 1).ratio > corner_count(f.schedule, f.series, f.series, 3, 1).ratio);
  CHECK(static_cast<double>(miss_complement(1.0L / 1000, 1000)) == doctest::Approx(1 - std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("growth dominance") {
  F2Setup f;
  const auto rows = growth_dominance(f.schedule, f.series, f.series, 1, 24);
  for (const auto& row : rows) {
    CAPTURE(row.n);
    CHECK(row.holds);
  }
  CHECK(rows.back().ratio > rows.front().ratio * 4);
}

TEST_CASE("sandwich on Z x Z with a linear schedule") {
  const Group z(GroupSpec::lattice(1));
  const int R = 3;
  auto b = std::make_shared<const CayleyBall>(z, R);
  const ProductWindow w(b, b, 1.0, R);
  const auto lin = linear_schedule(1.0, 40);
  const auto h = Horofunction::from_ray(z, Ray{{}, {1}}, R);
  const ProductHorofunction theta(h, h, 1.0);
  auto center = [&](int n) {
    const int k = n / 2;
    return ProductPoint{z.canon(std::string(static_cast<std::size_t>(k), 'X')),
                        z.canon(std::string(static_cast<std::size_t>(n - k), 'X'))};
  };
  const auto report = sandwich_report(lin, 12, 30, center, w, theta);
  CHECK(report.total_violations == 0);
  CHECK(report.first_holding == 12);
  for (const auto& row : report.rows) {
    // D n W is exactly a half-space: nothing at delta - 1 is missing either.
    const auto members = diamond_members(lin, row.r, center(row.n), w);
    std::size_t in_hb = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (in_horoball(theta(w.point(k)), row.delta)) ++in_hb;
    }
    CHECK(in_hb == members.size());
  }
}

TEST_CASE("sandwich on F2 x F2") {
  F2Setup f;
  const int R = 4;
  auto b = std::make_shared<const CayleyBall>(f.g, R);
  const ProductWindow w(b, b, 1.0, R);
  const auto h = Horofunction::from_ray(f.g, Ray{{}, {1}}, R);
  const ProductHorofunction theta(h, h, 1.0);
  auto center = [&](int n) {
    const int r = f.schedule.radius(n);
    const int k = r / 2;
    const int kp = f.schedule.f_at(r - k);
    return ProductPoint{f.g.canon(std::string(static_cast<std::size_t>(k), 'A')),
                        f.g.canon(std::string(static_cast<std::size_t>(kp), 'A'))};
  };
  const auto report = sandwich_report(f.schedule, 16, 30, center, w, theta);
  REQUIRE(report.first_holding.has_value());
  CHECK(report.vacuous_rows == 0);
  CHECK(*report.first_holding <= 18);

  // A window the diamonds never reach.
  auto far = [&](int) { return ProductPoint{f.g.canon("aaaaaaaaaaaaaaaaaaaa"), f.g.canon("aaaaaaaaaaaaaaaaaaaa")}; };
  CHECK_THROWS_AS(sandwich_report(f.schedule, 1, 3, far, w, theta), InputError);
}
