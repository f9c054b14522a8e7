#include <random>
#include <set>

#include "doctest.h"
#include "horolab/errors.hpp"
#include "horolab/growth.hpp"
#include "horolab/horoboundary.hpp"
#include "horolab/product_metric.hpp"

using namespace horolab;

namespace {

// Brute force over the full product of factor balls, using rho directly.
std::size_t brute_ball(const ProductMetric& m, int n) {
  const CayleyBall b1(m.first(), n);
  const CayleyBall b2(m.second(), second_radius_for(n, m.c()));
  std::size_t count = 0;
  for (std::size_t i = 0; i < b1.size(); ++i) {
    for (std::size_t j = 0; j < b2.size(); ++j) {
      if (within_radius(m.rho(m.origin(), {b1.element(i), b2.element(j)}), n)) ++count;
    }
  }
  return count;
}

}  // namespace

TEST_CASE("rho formula") {
  const Group z(GroupSpec::lattice(1));
  const ProductMetric m1(z, z, 1.0);
  const ProductPoint o = m1.origin();
  CHECK(m1.rho(o, o) == 0.0);
  CHECK(m1.rho(o, {z.canon("x"), z.canon("x")}) == 2.0);
  const ProductMetric m2(z, z, 2.0);
  CHECK(m2.rho(o, {z.canon("xxx"), z.canon("xxxx")}) == 5.0);
  CHECK_THROWS_AS(ProductMetric(z, z, 0.0), InputError);
}

TEST_CASE("perfect diamonds") {
  const Group f2(GroupSpec::free(2));
  const ProductMetric m(f2, f2, 1.0);
  CHECK(perfect_diamond(m, m.origin(), 0).size() == 1);
  CHECK(perfect_diamond(m, m.origin(), 2).size() == 49);
  const Group z(GroupSpec::lattice(1));
  const ProductMetric mz(z, z, 1.0);
  CHECK(perfect_diamond(mz, mz.origin(), 1).size() == 5);
  CHECK(perfect_diamond(mz, mz.origin(), 2).size() == 13);
  CHECK_THROWS_AS(perfect_diamond(m, m.origin(), 4, 500), ResourceError);
}

TEST_CASE("slice sum equals enumeration") {
  const auto f2 = counted_growth_series(GroupSpec::free(2), 10);
  const auto s = ball_slice_volume(f2, f2, 1.0, 2);
  CHECK(s.total == 49);
  CHECK(s.summands == std::vector<std::uint64_t>{12 * 1, 4 * 5, 1 * 17});
  CHECK(ball_slice_volume(f2, f2, 1.0, 0).total == 1);
  const auto z = counted_growth_series(GroupSpec::lattice(1), 10);
  CHECK(ball_slice_volume(z, z, 1.0, 2).total == 13);
  CHECK_THROWS_AS(ball_slice_volume(f2, f2, 1.0, 11), InputError);

  const Group g(GroupSpec::free(2));
  for (double c : {1.0, 0.5, 1.5, 2.0}) {
    const ProductMetric m(g, g, c);
    for (int n = 0; n <= 4; ++n) {
      CAPTURE(c);
      CAPTURE(n);
      const auto total = ball_slice_volume(f2, f2, c, n).total;
      CHECK(total == brute_ball(m, n));
      CHECK(total == perfect_diamond(m, m.origin(), n).size());
    }
  }
}

TEST_CASE("rho is a left-invariant metric") {
  std::mt19937_64 rng(11);
  const Group f2(GroupSpec::free(2));
  const Group z2(GroupSpec::lattice(2));
  const ProductMetric m(f2, z2, 0.7);
  const CayleyBall b1(f2, 4);
  const CayleyBall b2(z2, 4);
  std::uniform_int_distribution<std::size_t> p1(0, b1.size() - 1);
  std::uniform_int_distribution<std::size_t> p2(0, b2.size() - 1);
  auto pick = [&] { return ProductPoint{b1.element(p1(rng)), b2.element(p2(rng))}; };
  for (int trial = 0; trial < 300; ++trial) {
    const auto x = pick();
    const auto y = pick();
    const auto w = pick();
    const auto g = pick();
    CHECK(m.rho(x, y) == doctest::Approx(m.rho(y, x)));
    CHECK((m.rho(x, y) == 0.0) == (x == y));
    CHECK(m.rho(x, w) <= m.rho(x, y) + m.rho(y, w) + kRhoEpsilon);
    CHECK(m.rho(m.multiply(g, x), m.multiply(g, y)) == doctest::Approx(m.rho(x, y)));
  }
}

TEST_CASE("diamonds nest") {
  const Group f2(GroupSpec::free(2));
  for (double c : {1.0, 2.0}) {
    const ProductMetric m(f2, f2, c);
    for (double r = 0; r <= 2.5; r += 0.5) {
      const auto small = perfect_diamond(m, m.origin(), r);
      const auto big = perfect_diamond(m, m.origin(), r + 1.0 / c);
      const std::set<ProductPoint> b(big.begin(), big.end());
      for (const auto& p : small) CHECK(b.count(p) == 1);
    }
  }
}

TEST_CASE("product windows index the rho ball") {
  const Group f2(GroupSpec::free(2));
  auto b1 = std::make_shared<const CayleyBall>(f2, 3);
  auto b2 = std::make_shared<const CayleyBall>(f2, 6);
  const ProductWindow w(b1, b2, 2.0, 3.0);
  const ProductMetric m(f2, f2, 2.0);
  CHECK(w.size() == perfect_diamond(m, m.origin(), 3.0).size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w.find(w.point(i)) == static_cast<std::int64_t>(i));
    CHECK(within_radius(w.rho_to_origin(i), 3.0));
  }
  CHECK_THROWS_AS(ProductWindow(b1, b1, 2.0, 3.0), InputError);
}

TEST_CASE("ray horofunctions on F2") {
  const Group f2(GroupSpec::free(2));
  const auto h = Horofunction::from_ray(f2, Ray{{}, {0}}, 3);
  CHECK(h.backing() == Backing::kExactRay);
  CHECK(h(f2.identity()) == 0);
  CHECK(h(f2.canon("a")) == -1);
  CHECK(h(f2.canon("b")) == 1);
  CHECK(h(f2.canon("A")) == 1);
  CHECK_THROWS_AS(h(f2.canon("abab")), WindowExhausted);
  CHECK_NOTHROW(check_horofunction(h));
  // The ray a b B ... backtracks.
  CHECK_THROWS_AS(Horofunction::from_ray(f2, Ray{{0}, {2, 3}}, 2), InputError);
  // Longer window: recomputing with a longer prefix changes nothing.
  const auto h5 = Horofunction::from_ray(f2, Ray{{}, {0}}, 5);
  for (const auto& row : dump(h)) CHECK(h5(f2.canon(row.word)) == row.value);
}

TEST_CASE("anchor horofunctions") {
  const Group z(GroupSpec::lattice(1));
  const auto hz = Horofunction::from_anchor(z, z.canon("xxxxxxxxxx"), 3);
  CHECK(hz(z.identity()) == 0);
  CHECK(hz(z.canon("x")) == -1);
  const Group f2(GroupSpec::free(2));
  const auto h = Horofunction::from_anchor(f2, f2.canon("aaaa"), 2);
  CHECK(h(f2.canon("A")) == 1);
  CHECK(h.backing() == Backing::kAnchor);
  CHECK_THROWS_AS(Horofunction::from_anchor(f2, f2.canon("aaa"), 2), InputError);
  // Anchor values agree with the ray limit in the window.
  const auto ray = Horofunction::from_ray(f2, Ray{{}, {0}}, 2);
  for (const auto& row : dump(h)) CHECK(ray(f2.canon(row.word)) == row.value);
  CHECK_NOTHROW(check_horofunction(h));
}

TEST_CASE("ray horofunctions on lattices and free products") {
  const Group z2(GroupSpec::lattice(2));
  const auto h = Horofunction::from_ray(z2, Ray{{}, {0, 2}}, 3);
  CHECK_NOTHROW(check_horofunction(h));
  CHECK(h(z2.canon("xy")) == -2);
  const Group fp(GroupSpec::free_product({GroupSpec::cyclic(2), GroupSpec::cyclic(3)}));
  const auto hp = Horofunction::from_ray(fp, Ray{{}, {0, 1}}, 4);
  CHECK_NOTHROW(check_horofunction(hp));
}

TEST_CASE("descent") {
  const Group f2(GroupSpec::free(2));
  const auto h = Horofunction::from_ray(f2, Ray{{}, {0}}, 4);
  CHECK(descend(h, f2.identity()) == f2.canon("a"));
  CHECK(descend(h, f2.canon("b")) == f2.identity());
  const Group z(GroupSpec::lattice(1));
  const auto hz = Horofunction::from_ray(z, Ray{{}, {0}}, 8);
  CHECK(descend(hz, z.canon("xxxxx")) == z.canon("xxxxxx"));
  CHECK_THROWS_AS(descend(hz, z.canon("xxxxxxxx")), WindowExhausted);

  // Descent paths drop by one per step until the boundary.
  const CayleyBall ball(f2, 3);
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const auto path = descent_path(h, ball.element(i), 10);
    CHECK(path.reached_boundary);
    for (std::size_t k = 0; k < path.points.size(); ++k) {
      CHECK(h(path.points[k]) == h(ball.element(i)) - static_cast<int>(k));
    }
  }
}

TEST_CASE("product horofunctions and horoballs") {
  const Group f2(GroupSpec::free(2));
  const auto h = Horofunction::from_ray(f2, Ray{{}, {0}}, 3);
  const ProductHorofunction p1(h, h, 1.0);
  CHECK(p1({f2.identity(), f2.identity()}) == 0.0);
  CHECK(p1({f2.canon("a"), f2.canon("b")}) == 0.0);
  const ProductHorofunction p2(h, h, 2.0);
  CHECK(p2.from_values(1, -2) == 0.0);

  // 1-Lipschitz for rho and nested horoballs.
  const ProductMetric m(f2, f2, 2.0);
  const auto ball = perfect_diamond(m, m.origin(), 1.5);
  for (const auto& x : ball) {
    for (const auto& y : ball) CHECK(std::abs(p2(x) - p2(y)) <= m.rho(x, y) + kRhoEpsilon);
  }
  for (double d1 = -2; d1 <= 2; d1 += 0.5) {
    for (const auto& x : ball) {
      if (in_horoball(p2(x), d1)) CHECK(in_horoball(p2(x), d1 + 0.5));
    }
  }
}

TEST_CASE("boundary pair classification") {
  CHECK(classify_boundary_pair(PointKind::kBoundary, PointKind::kBoundary) == BoundaryType::kTypeII);
  CHECK(classify_boundary_pair(PointKind::kElement, PointKind::kBoundary) == BoundaryType::kTypeI);
  CHECK(classify_boundary_pair(PointKind::kBoundary, PointKind::kElement) == BoundaryType::kTypeI);
  CHECK(classify_boundary_pair(PointKind::kElement, PointKind::kElement) == BoundaryType::kInterior);
}
