#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "horolab/errors.hpp"
#include "horolab/graphing.hpp"

using namespace horolab;

namespace {

struct World {
  GroupSpec spec;
  Group g;
  GrowthSeries series;
  SlopeSchedule schedule;
  double c;

  World(GroupSpec s, double c_, SlopeSchedule sched)
      : spec(s), g(s), series(counted_growth_series(s, 30)), schedule(std::move(sched)), c(c_) {}

  static World f2() {
    const auto s = counted_growth_series(GroupSpec::free(2), 30);
    return World(GroupSpec::free(2), 1.0, build_schedule(s, s, 1.0, 24));
  }
  static World z() { return World(GroupSpec::lattice(1), 1.0, linear_schedule(1.0, 24)); }

  ProcessSpace space(double radius, int n) const { return ProcessSpace(g, g, series, series, schedule, c, radius, n); }

  PercolationKernel kernel(double radius) const { return PercolationKernel::geometric(series, series, c, 2 * radius); }
};

std::size_t outer_index_of(const ProcessSpace& space, const ProductPoint& p) {
  const auto i1 = space.first_ball().find(p.first);
  const auto i2 = space.second_ball().find(p.second);
  for (std::size_t i = 0; i < space.outer_size(); ++i) {
    if (space.outer_first(i) == i1 && space.outer_second(i) == i2) return i;
  }
  FAIL("center not in the center window");
  return 0;
}

// A process with hand-placed diamonds.
DiamondProcess placed(const ProcessSpace& space, const std::vector<std::pair<ProductPoint, double>>& centers) {
  DiamondProcess p;
  p.n = space.n();
  p.seed = 17;
  for (const auto& [center, mark] : centers) {
    const auto i = outer_index_of(space, center);
    p.diamonds.push_back({i, space.outer_key(i), mark, space.members(i)});
    ++p.centers;
  }
  return p;
}

std::map<std::int32_t, std::size_t> in_degrees(const WindowGraph& g) {
  std::map<std::int32_t, std::size_t> in;
  for (const auto& e : g.edges) ++in[e.second];
  return in;
}

}  // namespace

TEST_CASE("overlap index rule") {
  CHECK(overlap_index(1, 0.42) == 1);
  CHECK(overlap_index(2, 0.9) == 2);
  CHECK(overlap_index(2, 0.5) == 1);
  CHECK(overlap_index(3, 0.0) == 1);
  CHECK(overlap_index(3, 0.34) == 2);
  CHECK(overlap_index(3, 1.0) == 3);
  CHECK_THROWS_AS(overlap_index(0, 0.5), InputError);
}

TEST_CASE("single diamond on Z x Z: horizontal rays into the center column") {
  const auto w = World::z();
  const auto space = w.space(6, 3);
  const auto process = placed(space, {{{w.g.identity(), w.g.identity()}, 0.5}});
  const auto marked = marked_points(process, space.window().size());
  REQUIRE(marked.size() == space.volume());
  const auto pi1 = build_pi1(space, process, marked);
  for (std::size_t v = 0; v < marked.size(); ++v) {
    const auto y = space.window().point(static_cast<std::size_t>(marked.points[v].point));
    if (w.g.length(y.first) == 0) {
      CHECK(pi1.status[v] == Pi1Status::kCenter);
      continue;
    }
    REQUIRE(pi1.status[v] == Pi1Status::kActive);
    const auto t = space.window().point(static_cast<std::size_t>(marked.points[static_cast<std::size_t>(pi1.target[v])].point));
    CHECK(t.second == y.second);
    CHECK(w.g.length(t.first) == w.g.length(y.first) - 1);
  }
  // Disjoint rays: in-degree at most 1 off the center column.
  for (const auto& [v, d] : in_degrees(pi1.graph)) {
    if (pi1.status[static_cast<std::size_t>(v)] == Pi1Status::kActive) CHECK(d == 1);
  }
  CHECK(pi1.parallel_failures == 0);

  // Each point covered once: S'_0 = S', phi = id, F empty, Pi4 = Pi3.
  const auto overlap = break_overlaps(space, 1, marked);
  CHECK(overlap.kept_count == marked.size());
  const auto induced = build_pi4_pi5(space, 1, marked, union_graph(pi1.graph, WindowGraph{Stage::kPi2, marked.size(), false, {}}, Stage::kPi3), overlap);
  CHECK(induced.forest.edges.empty());
  for (std::size_t v = 0; v < marked.size(); ++v) CHECK(induced.phi[v] == static_cast<std::int32_t>(v));
  CHECK(induced.pi4.edges.size() == pi1.graph.edges.size());
  CHECK(induced.pi5.edges.size() == pi1.graph.edges.size());
}

TEST_CASE("overlapping diamonds give distinct marked copies") {
  const auto w = World::f2();
  const auto space = w.space(3, 2);
  const ProductPoint o{w.g.identity(), w.g.identity()};
  const ProductPoint a{w.g.canon("a"), w.g.identity()};
  const auto process = placed(space, {{o, 0.3}, {a, 0.7}});
  const auto marked = marked_points(process, space.window().size());
  CHECK(marked.size() == process.diamonds[0].members.size() + process.diamonds[1].members.size());
  const auto y = static_cast<std::size_t>(space.window().find(a));
  REQUIRE(marked.copies(y) == 2);
  const auto first = static_cast<std::size_t>(marked.offsets[y]);
  CHECK(marked.points[first].mark == 0.3);
  CHECK(marked.points[first + 1].mark == 0.7);

  const auto pi1 = build_pi1(space, process, marked);
  // At a, the copy in the diamond around a is on its center slice; the other descends to o.
  CHECK(pi1.status[first] == Pi1Status::kActive);
  CHECK(pi1.status[first + 1] == Pi1Status::kCenter);
  CHECK(marked.points[static_cast<std::size_t>(pi1.target[first])].point == 0);

  const auto overlap = break_overlaps(space, 5, marked);
  std::size_t covered = 0;
  for (std::size_t p = 0; p < space.window().size(); ++p) {
    if (marked.copies(p) == 0) {
      CHECK(overlap.survivor[p] == -1);
      continue;
    }
    ++covered;
    const double wv = CounterRng(5).uniform(Stream::kOverlap, space.window_key(p));
    CHECK(overlap.survivor[p] == marked.offsets[p] + static_cast<std::int32_t>(overlap_index(marked.copies(p), wv)) - 1);
  }
  CHECK(overlap.kept_count == covered);

  auto bad = process;
  bad.diamonds[1].mark = 0.3;
  CHECK_THROWS_AS(break_overlaps(space, 5, marked_points(bad, space.window().size())), InvariantViolation);
}

TEST_CASE("one component, one survivor: empty Pi4 and a single Pi5 vertex") {
  const auto w = World::f2();
  const auto space = w.space(2, 1);
  MarkedSet marked;
  marked.points = {{0, 0, 0.1}, {0, 1, 0.2}, {0, 2, 0.3}};
  marked.offsets.assign(space.window().size() + 1, 3);
  marked.offsets[0] = 0;
  const WindowGraph pi3{Stage::kPi3, 3, false, {{0, 1}, {1, 2}}};
  OverlapBreak overlap;
  overlap.survivor.assign(space.window().size(), -1);
  overlap.survivor[0] = 1;
  overlap.kept = {0, 1, 0};
  overlap.kept_count = 1;
  const auto induced = build_pi4_pi5(space, 3, marked, pi3, overlap);
  CHECK(induced.pi4.edges.empty());
  CHECK(induced.pi5.edges.empty());
  CHECK(induced.phi == std::vector<std::int32_t>{1, 1, 1});
  CHECK(induced.forest.edges.size() == 2);
  CHECK(induced.components == 1);
  CHECK(induced.flagged_components == 0);

  // Without a survivor the component is flagged.
  overlap.kept = {0, 0, 0};
  overlap.kept_count = 0;
  const auto flagged = build_pi4_pi5(space, 3, marked, pi3, overlap);
  CHECK(flagged.flagged_components == 1);
  CHECK(flagged.flagged_points == 3);
  CHECK(flagged.forest.edges.empty());
}

TEST_CASE("sampled F2 x F2 windows") {
  const auto w = World::f2();
  const double radius = 4;
  const auto space = w.space(radius, 2);
  const PercolationSampler sampler(space.window_ptr(), w.kernel(radius), 0.2);
  const auto keys = window_keys(space);
  for (int s = 0; s < 10; ++s) {
    const auto seed = run_seed(99, static_cast<std::uint64_t>(s));
    const auto process = sample_diamond_process(space, seed);
    const auto perc = sampler.sample(seed, keys);
    std::size_t prev_largest = 0;
    std::size_t prev_components = SIZE_MAX;
    for (double eps : {0.0, 0.01, 0.05, 0.1, 0.2}) {
      CAPTURE(s);
      CAPTURE(eps);
      const auto run = run_graphing(space, process, perc, eps);
      const auto& pi1 = run.pi1;
      CHECK(pi1.parallel_failures == 0);
      std::vector<std::size_t> out(run.marked.size(), 0);
      for (const auto& e : pi1.graph.edges) ++out[static_cast<std::size_t>(e.first)];
      for (std::size_t v = 0; v < run.marked.size(); ++v) {
        const double rho = space.window().rho_to_origin(static_cast<std::size_t>(run.marked.points[v].point));
        if (pi1.status[v] == Pi1Status::kActive) CHECK(out[v] == 1);
        if (pi1.status[v] == Pi1Status::kExhausted) CHECK(rho > radius - 1);
        if (pi1.status[v] != Pi1Status::kActive) CHECK(out[v] == 0);
      }
      // Pi3 contains Pi1.
      const std::set<Edge> pi3(run.pi3.edges.begin(), run.pi3.edges.end());
      for (const auto& [a, b] : pi1.graph.edges) CHECK(pi3.count({std::min(a, b), std::max(a, b)}) == 1);

      // S'_0 projects bijectively onto S.
      std::set<std::int32_t> points;
      std::size_t covered = 0;
      for (std::size_t p = 0; p < space.window().size(); ++p) covered += run.marked.copies(p) > 0;
      for (std::size_t v = 0; v < run.marked.size(); ++v) {
        if (run.overlap.kept[v]) points.insert(run.marked.points[v].point);
      }
      CHECK(points.size() == run.overlap.kept_count);
      CHECK(points.size() == covered);

      // Transport identity over the whole window: out = in = |S' \ S'_0| outside flagged parts.
      const auto& ind = run.induced;
      CHECK(ind.forest.edges.size() == run.marked.size() - ind.flagged_points - run.overlap.kept_count);
      for (const auto& [v, u] : ind.forest.edges) {
        CHECK(ind.phi[static_cast<std::size_t>(v)] == ind.phi[static_cast<std::size_t>(u)]);
        CHECK(ind.depth[static_cast<std::size_t>(u)] == ind.depth[static_cast<std::size_t>(v)] - 1);
      }

      const auto cost = seed_cost(space, run, 1.0);
      CHECK(cost.pi5_holds);
      CHECK(cost.pi1_half_degree == 1.0);
      CHECK(cost.pi3_half_degree >= 1.0);
      if (eps == 0.0) CHECK(cost.pi3_half_degree == 1.0);
      CHECK(ind.largest_component >= prev_largest);
      CHECK(ind.components <= prev_components);
      prev_largest = ind.largest_component;
      prev_components = ind.components;
    }
  }
}

TEST_CASE("cost report") {
  const auto w = World::f2();
  const double radius = 4;
  const auto space = w.space(radius, 2);
  const PercolationSampler sampler(space.window_ptr(), w.kernel(radius), 0.05);
  const auto keys = window_keys(space);
  std::vector<SeedCost> zero;
  std::vector<SeedCost> some;
  for (int s = 0; s < 30; ++s) {
    const auto seed = run_seed(7, static_cast<std::uint64_t>(s));
    const auto process = sample_diamond_process(space, seed);
    const auto perc = sampler.sample(seed, keys);
    zero.push_back(seed_cost(space, run_graphing(space, process, perc, 0.0), 1.0));
    some.push_back(seed_cost(space, run_graphing(space, process, perc, 0.05), 1.0));
  }
  const auto r0 = cost_report(zero, 1.0);
  CHECK(r0.row(Stage::kPi1).half_degree_mean == 1.0);
  CHECK(r0.row(Stage::kPi3).half_degree_mean == 1.0);
  CHECK(r0.row(Stage::kPi1).half_degree_se == 0.0);
  CHECK(r0.pi5_every_run);

  const auto r = cost_report(some, 1.0);
  const auto& pi3 = r.row(Stage::kPi3);
  CHECK(pi3.half_degree_mean >= 1.0);
  CHECK(pi3.half_degree_mean <= 1.05 + 3 * pi3.half_degree_se + pi3.boundary_deficit);
  CHECK(r.pi5_every_run);
  CHECK(pi3.lambda_hat > 0.0);
  CHECK(pi3.lambda_hat <= 1.0);

  const auto doc = r.to_json();
  for (const auto& row : doc["stages"]) {
    for (const char* f : {"stage", "half_degree_mean", "half_degree_se", "lambda_hat", "pi5_bound_lhs",
                          "pi5_bound_rhs", "boundary_deficit", "seeds"}) {
      CHECK(row.contains(f));
    }
  }
  CHECK_THROWS_AS(cost_report({}, 1.0), InputError);
  CHECK_THROWS_AS(seed_cost(space, run_graphing(space, sample_diamond_process(space, 1), sampler.sample(1, keys), 0.0), 10.0),
                  InputError);
}

TEST_CASE("single diamond with lambda = 1: Pi5 bound reduces to Pi5 <= Pi3") {
  const auto w = World::z();
  const auto space = w.space(6, 3);
  const auto process = placed(space, {{{w.g.identity(), w.g.identity()}, 0.5}});
  const PercolationSampler sampler(space.window_ptr(), w.kernel(6), 0.3);
  const auto run = run_graphing(space, process, sampler.sample(2, window_keys(space)), 0.3);
  const auto cost = seed_cost(space, run, 1.0);
  CHECK(cost.lambda_hat == 1.0);
  CHECK(cost.lambda_full == 1.0);
  CHECK(cost.pi5_rhs == doctest::Approx(cost.pi3_mean_degree));
  CHECK(cost.pi5_lhs <= cost.pi5_rhs + 1e-12);
}

TEST_CASE("touching paths on Z x Z") {
  const Group z(GroupSpec::lattice(1));
  const auto h = Horofunction::from_ray(z, Ray{{}, {0}}, 14);
  const ProductHorofunction theta(h, h, 1.0);
  const ProductPoint x1{z.canon("xx"), z.identity()};
  const ProductPoint x2{z.identity(), z.canon("x")};
  const auto paths = connecting_paths(theta, theta, x1, x2, 6);
  CHECK(paths.k == 2);
  CHECK(paths.k_prime == 1);
  CHECK_FALSE(paths.truncated);
  const auto t = touching_paths(theta, theta, paths.eta, paths.k, paths.eta_prime, paths.k_prime);
  CHECK(t.bound == 4.0);
  REQUIRE(t.distance.size() == 7);
  for (std::size_t j = 0; j < t.distance.size(); ++j) {
    const auto jj = static_cast<double>(j);
    CHECK(t.distance[j] <= 3.0);
    CHECK(t.theta1[j] == -2 * jj - 2);
    CHECK(t.theta2[j] == -2 * jj - 1);
  }
  CHECK(t.bound_holds);
  CHECK(t.monotone1);
  CHECK(t.monotone2);

  const auto same = connecting_paths(theta, theta, x1, x1, 4);
  CHECK(same.k == 0);
  CHECK(same.k_prime == 0);
  const auto ts = touching_paths(theta, theta, same.eta, 0, same.eta_prime, 0);
  for (double d : ts.distance) CHECK(d == 0.0);

  CHECK_THROWS_AS(touching_paths(theta, theta, {z.identity()}, 2, {z.identity()}, 0), InputError);
}

TEST_CASE("touching paths on F2 x F2, c in {1, 2}") {
  const Group f2(GroupSpec::free(2));
  for (double c : {1.0, 2.0}) {
    const int domain = 12;
    const auto ha = Horofunction::from_ray(f2, Ray{{}, {0}}, domain);
    const auto hb = Horofunction::from_ray(f2, Ray{{}, {2}}, domain);
    const auto hab = Horofunction::from_ray(f2, Ray{{}, {0, 2}}, domain);
    const ProductHorofunction t1(ha, hb, c);
    const ProductHorofunction t2(hab, ha, c);
    for (const char* w1 : {"", "a", "bA", "ab"}) {
      for (const char* w2 : {"", "B", "ba", "aab"}) {
        CAPTURE(c);
        CAPTURE(w1);
        CAPTURE(w2);
        const ProductPoint x1{f2.canon(w1), f2.canon(w2)};
        const ProductPoint x2{f2.canon(w2), f2.canon(w1)};
        const auto p = connecting_paths(t1, t2, x1, x2, 5);
        const auto t = touching_paths(t1, t2, p.eta, p.k, p.eta_prime, p.k_prime);
        CHECK(t.bound == doctest::Approx(p.k + (p.k_prime + 1) / c));
        CHECK_FALSE(t.distance.empty());
        CHECK(t.bound_holds);
        CHECK(t.monotone1);
        CHECK(t.monotone2);
        for (double d : t.distance) CHECK(d <= t.bound + 1e-9);
      }
    }
  }
}

TEST_CASE("coset-line baseline") {
  const auto w = World::f2();
  const double radius = 3;
  auto b = std::make_shared<const CayleyBall>(w.g, 3);
  auto window = std::make_shared<const ProductWindow>(b, b, 1.0, radius);
  const LineBaseline base(window, w.kernel(radius), 0.2);

  const auto s0 = base.sample(1);
  const auto r0 = base.run(s0, 0.0);
  CHECK(r0.lines_exact);
  CHECK(r0.components == base.line_count());
  CHECK(r0.half_degree == 1.0);
  CHECK(r0.expected_half_degree == 1.0);

  double big = 0.0;
  double small = 0.0;
  double half = 0.0;
  double expected = 0.0;
  const int seeds = 60;
  for (int s = 0; s < seeds; ++s) {
    const auto sample = base.sample(run_seed(3, static_cast<std::uint64_t>(s)));
    std::size_t prev = SIZE_MAX;
    for (double eps : {0.0, 0.05, 0.1, 0.2}) {
      const auto r = base.run(sample, eps);
      CHECK(r.components <= prev);
      prev = r.components;
    }
    small += base.run(sample, 0.05).largest_fraction;
    const auto r = base.run(sample, 0.2);
    big += r.largest_fraction;
    half += r.half_degree;
    expected += r.expected_half_degree;
  }
  CHECK(big > small);
  // Interior half-degree per seed averages ~70 points; spread is well below 0.02.
  CHECK(std::fabs(half / seeds - expected / seeds) < 0.02);

  const auto forced = PercolationKernel::synthetic(w.series, w.series, 1.0, std::vector<long double>(6, 1.0L));
  const LineBaseline full(window, forced, 1.0);
  CHECK(full.run(full.sample(1), 1.0).components == 1);

  const Group c3(GroupSpec::cyclic(3));
  auto bc = std::make_shared<const CayleyBall>(c3, 1);
  auto wc = std::make_shared<const ProductWindow>(bc, bc, 1.0, 1.0);
  const auto cs = counted_growth_series(GroupSpec::cyclic(3), 4);
  CHECK_THROWS_AS(LineBaseline(wc, PercolationKernel::geometric(cs, cs, 1.0, 2), 0.1), InputError);
}
