#include "horolab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "horolab/diamonds.hpp"
#include "horolab/errors.hpp"
#include "horolab/graphing.hpp"
#include "horolab/growth.hpp"
#include "horolab/horoboundary.hpp"
#include "horolab/io.hpp"
#include "horolab/percolation.hpp"
#include "horolab/point_process.hpp"
#include "horolab/slope_schedule.hpp"

namespace horolab {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) { return format_double(v); }

struct F2World {
  Group g{GroupSpec::free(2)};
  GrowthSeries series = counted_growth_series(GroupSpec::free(2), 36);
  SlopeSchedule schedule = build_schedule(series, series, 1.0, 30);
};

// Rate estimates must be non-increasing and >= 3 from n = 1 on.
bool f2_rates_ok(const GrowthSeries& s) {
  for (int n = 1; n <= s.horizon(); ++n) {
    const auto un = static_cast<std::size_t>(n);
    if (s.rate_estimates[un] < 3.0 - 1e-12) return false;
    if (n >= 2 && s.rate_estimates[un] > s.rate_estimates[un - 1] + 1e-12) return false;
  }
  return true;
}

Check growth_oracles() {
  const auto t0 = Clock::now();
  const Group f2(GroupSpec::free(2));
  const auto bfs = growth_series(f2, 8);
  bool exact = true;
  std::uint64_t p3 = 1;
  for (int n = 0; n <= 8; ++n, p3 *= 3) exact = exact && bfs.volumes[static_cast<std::size_t>(n)] == 2 * p3 - 1;
  const auto counted = counted_growth_series(GroupSpec::free(2), 30);
  const bool rates = f2_rates_ok(bfs) && f2_rates_ok(counted);
  const double secs = since(t0);
  std::string detail = std::string("v_n = 2*3^n - 1 for n <= 8: ") + (exact ? "yes" : "no") +
                       "; rates non-increasing and >= 3 (bfs n <= 8, counted n <= 30): " + (rates ? "yes" : "no");
  return {"growth oracles", exact && rates && secs < 10.0, detail, secs};
}

Check ball_decomposition() {
  const auto t0 = Clock::now();
  const Group f2(GroupSpec::free(2));
  const auto s = counted_growth_series(GroupSpec::free(2), 8);
  bool ok = true;
  std::string detail;
  for (int n = 0; n <= 4; ++n) {
    const CayleyBall b(f2, n);
    std::uint64_t brute = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) brute += b.distance(i) + b.distance(j) <= n;
    }
    const auto slices = ball_slice_volume(s, s, 1.0, n).total;
    ok = ok && slices == brute;
    detail += "n=" + std::to_string(n) + ":" + std::to_string(slices) + "/" + std::to_string(brute) + " ";
  }
  return {"ball decomposition", ok, detail, since(t0)};
}

Check schedule_construction() {
  const auto t0 = Clock::now();
  const auto s1 = counted_growth_series(GroupSpec::free(2), 36);
  const auto s = build_schedule(s1, s1, 1.0, 30);
  bool ok = s.f_at(0) == 0 && s.f_at(1) == 0 && s.f_at(2) == 2;
  std::string detail = "f(0..2)=" + std::to_string(s.f_at(0)) + "," + std::to_string(s.f_at(1)) + "," +
                       std::to_string(s.f_at(2));
  const long double lo = 1.0L / s.M;
  const long double hi = std::pow(static_cast<long double>(s.M), 2.0L * s.c);
  bool window = !s.ratios.empty();
  for (auto q : s.ratios) window = window && q >= lo && q <= hi;
  detail += "; ratios in [1/M, M^2c] at " + std::to_string(s.ratios.size()) + " breakpoints: " + (window ? "yes" : "no");
  bool dev = true;
  for (const auto& row : verify_almost_linear(s, 5)) {
    dev = dev && row.N && *row.N + row.m <= s.horizon && row.tail_deviation <= 1.0 + 1e-12;
    detail += "; N(" + std::to_string(row.m) + ")=" + (row.N ? std::to_string(*row.N) : std::string("none"));
  }
  const double secs = since(t0);
  return {"slope schedule", ok && window && dev && secs < 5.0, detail, secs};
}

Check diamond_volume_check() {
  const auto t0 = Clock::now();
  F2World w;
  bool ok = true;
  int tested = 0;
  std::string detail;
  for (int n = 0; n < w.schedule.breakpoints(); ++n) {
    const auto v = diamond_volume(w.schedule, w.series, w.series, n);
    if (v > 1'000'000) break;
    const auto pts = enumerate_diamond(w.schedule, w.schedule.radius(n), ProductPoint{w.g.identity(), w.g.identity()},
                                       w.g, w.g);
    ok = ok && pts.size() == v;
    ++tested;
    if (w.schedule.radius(n) == 2) detail += "r=2: " + std::to_string(pts.size()) + "; ";
  }
  detail += std::to_string(tested) + " breakpoints enumerated";
  return {"diamond volume", ok && tested >= 3, detail, since(t0)};
}

int decreasing_tail(const std::vector<long double>& v) {
  if (v.empty()) return 0;
  int tail = 1;
  for (std::size_t i = v.size() - 1; i > 0 && v[i] < v[i - 1]; --i) ++tail;
  return tail;
}

Check corner_decay() {
  const auto t0 = Clock::now();
  F2World w;
  const int n_first = 1;
  const int n_last = std::min(w.schedule.breakpoints() - 1, 20);
  bool tails = true;
  std::string detail = "breakpoints 1.." + std::to_string(n_last) + "; strictly decreasing tails (ratio/probability):";
  for (int T : {1, 2, 3}) {
    std::vector<long double> ratio, prob, even, odd;
    for (int n = n_first; n <= n_last; ++n) {
      const auto row = corner_count(w.schedule, w.series, w.series, n, T);
      ratio.push_back(row.ratio);
      prob.push_back(row.probability);
      (n % 2 ? odd : even).push_back(row.ratio);
    }
    const int tr = decreasing_tail(ratio);
    const int tp = decreasing_tail(prob);
    tails = tails && tr >= 6 && tp >= 6;
    detail += " T=" + std::to_string(T) + ":" + std::to_string(tr) + "/" + std::to_string(tp) + " (per parity " +
              std::to_string(decreasing_tail(even)) + "," + std::to_string(decreasing_tail(odd)) + ")";
  }
  bool dom = true;
  for (const auto& row : growth_dominance(w.schedule, w.series, w.series, n_first, n_last)) dom = dom && row.holds;
  detail += std::string("; dominance at every breakpoint: ") + (dom ? "yes" : "no");
  const double secs = since(t0);
  return {"corner decay", tails && dom && secs < 60.0, detail, secs};
}

Check sandwich() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  {
    const Group z(GroupSpec::lattice(1));
    const int R = 3;
    auto b = std::make_shared<const CayleyBall>(z, R);
    const ProductWindow w(b, b, 1.0, R);
    const auto lin = linear_schedule(1.0, 40);
    const auto h = Horofunction::from_ray(z, Ray{{}, {1}}, R);
    const ProductHorofunction theta(h, h, 1.0);
    auto center = [&](int n) {
      const int k = n / 2;
      return ProductPoint{z.canon(Word(static_cast<std::size_t>(k), 1)),
                          z.canon(Word(static_cast<std::size_t>(n - k), 1))};
    };
    const auto report = sandwich_report(lin, 12, 30, center, w, theta);
    ok = ok && report.total_violations == 0 && report.vacuous_rows == 0;
    detail += "ZxZ R=3 n=12..30: " + std::to_string(report.total_violations) + " violations";
  }
  {
    F2World f;
    const int R = 4;
    auto b = std::make_shared<const CayleyBall>(f.g, R);
    const ProductWindow w(b, b, 1.0, R);
    const auto h = Horofunction::from_ray(f.g, Ray{{}, {1}}, R);
    const ProductHorofunction theta(h, h, 1.0);
    auto center = [&](int n) {
      const int r = f.schedule.radius(n);
      const int k = r / 2;
      return ProductPoint{f.g.canon(Word(static_cast<std::size_t>(k), 1)),
                          f.g.canon(Word(static_cast<std::size_t>(f.schedule.f_at(r - k)), 1))};
    };
    const int last = std::min(30, f.schedule.breakpoints() - 1);
    const auto report = sandwich_report(f.schedule, 16, last, center, w, theta);
    std::size_t tail_violations = 0;
    for (const auto& row : report.rows) {
      if (report.first_holding && row.n >= *report.first_holding) {
        tail_violations += row.lower_violations + row.upper_violations;
      }
    }
    ok = ok && report.first_holding.has_value() && tail_violations == 0;
    detail += "; F2xF2 R=4 n=16.." + std::to_string(last) + ": N0=" +
              (report.first_holding ? std::to_string(*report.first_holding) : std::string("none")) + ", " +
              std::to_string(report.total_violations) + " violations before N0";
  }
  return {"horoball sandwich", ok, detail, since(t0)};
}

struct GraphWorld {
  F2World w;
  ProcessSpace space;
  GraphWorld(double R, int n)
      : space(w.g, w.g, w.series, w.series, build_schedule(w.series, w.series, 1.0, 24), 1.0, R, n) {}
};

Check pi1_forest(std::uint64_t master, int threads) {
  const auto t0 = Clock::now();
  const GraphWorld gw(5.0, 3);
  const auto& space = gw.space;
  const auto& win = space.window();
  const int seeds = 100;
  std::vector<std::size_t> interior(seeds), bad(seeds), groups(seeds), parallel(seeds);
  parallel_for(seeds, threads, [&](std::size_t i) {
    const auto process = sample_diamond_process(space, run_seed(master, i));
    const auto marked = marked_points(process, win.size());
    const auto pi1 = build_pi1(space, process, marked);
    std::vector<std::size_t> out(marked.size(), 0);
    for (const auto& e : pi1.graph.edges) ++out[static_cast<std::size_t>(e.first)];
    for (std::size_t v = 0; v < marked.size(); ++v) {
      const auto y = static_cast<std::size_t>(marked.points[v].point);
      if (!within_radius(win.rho_to_origin(y), win.radius() - 1.0)) continue;
      if (pi1.status[v] == Pi1Status::kCenter) continue;
      ++interior[i];
      if (out[v] != 1 || pi1.status[v] != Pi1Status::kActive) ++bad[i];
    }
    groups[i] = pi1.parallel_groups;
    parallel[i] = pi1.parallel_failures;
  });
  std::size_t n_int = 0, n_bad = 0, n_groups = 0, n_par = 0;
  for (int i = 0; i < seeds; ++i) {
    n_int += interior[static_cast<std::size_t>(i)];
    n_bad += bad[static_cast<std::size_t>(i)];
    n_groups += groups[static_cast<std::size_t>(i)];
    n_par += parallel[static_cast<std::size_t>(i)];
  }
  const std::string detail = "F2xF2 R=5 n=3, 100 seeds: " + std::to_string(n_int) + " interior points, " +
                             std::to_string(n_bad) + " without out-degree 1; " + std::to_string(n_groups) +
                             " shared-first-coordinate groups, " + std::to_string(n_par) + " parallel failures";
  return {"pi1 forest", n_int > 0 && n_bad == 0 && n_par == 0, detail, since(t0)};
}

Check touching() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::size_t traces = 0;
  auto record = [&](const TouchingTrace& t) {
    ok = ok && t.bound_holds && t.monotone1 && t.monotone2 && !t.distance.empty();
    for (double d : t.distance) ok = ok && d <= t.bound + kRhoEpsilon;
    ++traces;
  };
  {
    const Group z(GroupSpec::lattice(1));
    const auto h = Horofunction::from_ray(z, Ray{{}, {0}}, 14);
    const ProductHorofunction theta(h, h, 1.0);
    for (const char* a : {"", "x", "xx", "X"}) {
      for (const char* b : {"", "x", "XX"}) {
        const ProductPoint x1{z.canon(a), z.canon(b)};
        const ProductPoint x2{z.canon(b), z.canon(a)};
        const auto p = connecting_paths(theta, theta, x1, x2, 6);
        record(touching_paths(theta, theta, p.eta, p.k, p.eta_prime, p.k_prime));
      }
    }
  }
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
        const ProductPoint x1{f2.canon(w1), f2.canon(w2)};
        const ProductPoint x2{f2.canon(w2), f2.canon(w1)};
        const auto p = connecting_paths(t1, t2, x1, x2, 5);
        record(touching_paths(t1, t2, p.eta, p.k, p.eta_prime, p.k_prime));
      }
    }
  }
  return {"touching paths", ok, std::to_string(traces) + " traces over ZxZ and F2xF2 with c in {1, 2}", since(t0)};
}

Check cost(std::uint64_t master, int threads) {
  const auto t0 = Clock::now();
  const double R = 5.0;
  const GraphWorld gw(R, 3);
  const auto& space = gw.space;
  const auto& w = gw.w;
  const std::vector<double> eps{0.01, 0.05, 0.1, 0.2};
  const PercolationSampler sampler(space.window_ptr(), PercolationKernel::geometric(w.series, w.series, 1.0, 2 * R),
                                   eps.back());
  const auto keys = window_keys(space);
  const std::size_t seeds = 200;
  std::vector<std::vector<SeedCost>> costs(seeds);
  parallel_for(seeds, threads, [&](std::size_t i) {
    const auto seed = run_seed(master, i);
    const auto process = sample_diamond_process(space, seed);
    const auto sample = sampler.sample(seed, keys);
    for (double e : eps) costs[i].push_back(seed_cost(space, run_graphing(space, process, sample, e), 1.0));
  });
  std::vector<SeedCost> at05;
  bool monotone = true;
  bool pi5 = true;
  for (const auto& per : costs) {
    for (std::size_t k = 0; k < per.size(); ++k) {
      if (k > 0 && per[k].largest_fraction < per[k - 1].largest_fraction) monotone = false;
      pi5 = pi5 && per[k].pi5_lhs <= per[k].pi5_rhs + 1e-12;
    }
    at05.push_back(per[1]);
  }
  const auto report = cost_report(at05, 1.0);
  const auto& r3 = report.row(Stage::kPi3);
  const double hi = 1.0 + 0.05 + 3 * r3.half_degree_se + r3.boundary_deficit;
  const bool window = r3.half_degree_mean >= 1.0 && r3.half_degree_mean <= hi;
  const double secs = since(t0);
  std::string detail = "R=5 n=3, 200 seeds, eps=0.05: pi3 half-degree " + num(r3.half_degree_mean) + " (SE " +
                       num(r3.half_degree_se) + ", deficit " + num(r3.boundary_deficit) + ", upper " + num(hi) +
                       "); pi5 bound every run: " + (pi5 ? "yes" : "no") +
                       "; largest-component fraction monotone: " + (monotone ? "yes" : "no");
  return {"cost", window && pi5 && monotone && secs < 600.0, detail, secs};
}

Check prop13(std::uint64_t master, int threads) {
  const auto t0 = Clock::now();
  F2World w;
  const double R = 5.0;
  auto b = std::make_shared<const CayleyBall>(w.g, 5);
  auto window = std::make_shared<const ProductWindow>(b, b, 1.0, R);
  const std::vector<double> eps{0.0, 0.01, 0.05, 0.1, 0.2};
  const LineBaseline base(window, PercolationKernel::geometric(w.series, w.series, 1.0, 2 * R), eps.back());
  const std::size_t seeds = 50;
  std::vector<std::vector<LineRun>> runs(seeds);
  parallel_for(seeds, threads, [&](std::size_t i) {
    const auto sample = base.sample(run_seed(master, i));
    for (double e : eps) runs[i].push_back(base.run(sample, e));
  });
  bool exact = true;
  bool monotone = true;
  for (const auto& per : runs) {
    exact = exact && per[0].lines_exact && per[0].half_degree == 1.0 && per[0].components == base.line_count();
    for (std::size_t k = 1; k < per.size(); ++k) {
      if (per[k].components > per[k - 1].components || per[k].largest_fraction < per[k - 1].largest_fraction) {
        monotone = false;
      }
    }
  }
  const std::string detail = "F2xF2 R=5, 50 seeds: " + std::to_string(base.line_count()) +
                             " line segments; eps=0 partition exact with half-degree 1: " + (exact ? "yes" : "no") +
                             "; merging monotone: " + (monotone ? "yes" : "no");
  return {"coset-line baseline", exact && monotone, detail, since(t0)};
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::set<std::string> tree(const fs::path& root) {
  std::set<std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (e.path().filename() != "manifest.json") out.insert(rel);
  }
  return out;
}

}  // namespace

Check evaluate_criterion(int id, std::uint64_t master_seed, int threads) {
  switch (id) {
    case 1:
      return growth_oracles();
    case 2:
      return ball_decomposition();
    case 3:
      return schedule_construction();
    case 4:
      return diamond_volume_check();
    case 5:
      return corner_decay();
    case 6:
      return sandwich();
    case 7:
      return pi1_forest(master_seed, threads);
    case 8:
      return touching();
    case 9:
      return cost(master_seed, threads);
    case 10:
      return prop13(master_seed, threads);
    default:
      throw InputError("criterion " + std::to_string(id) + " is not evaluated in-process");
  }
}

std::vector<Check> evaluate_criteria(std::uint64_t master_seed, int threads) {
  std::vector<Check> out;
  for (int id = 1; id <= 10; ++id) out.push_back(evaluate_criterion(id, master_seed, threads));
  return out;
}

Check compare_outputs(const fs::path& a, const fs::path& b) {
  const auto t0 = Clock::now();
  const auto ta = tree(a);
  const auto tb = tree(b);
  std::vector<std::string> differ;
  for (const auto& f : ta) {
    if (!tb.count(f) || slurp(a / f) != slurp(b / f)) differ.push_back(f);
  }
  for (const auto& f : tb) {
    if (!ta.count(f)) differ.push_back(f);
  }
  std::string detail = std::to_string(ta.size()) + " data files compared";
  if (!differ.empty()) detail += "; differing: " + differ.front() + (differ.size() > 1 ? " and others" : "");
  return {"determinism", !ta.empty() && differ.empty(), detail, since(t0)};
}

std::string format_check_line(int id, const Check& check) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2fs", check.seconds);
  return "criterion " + std::to_string(id) + ": " + (check.pass ? "PASS " : "FAIL ") + check.name + " (" +
         check.detail + ") [" + secs + "]";
}

}  // namespace horolab
