#include "horolab/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "horolab/acceptance.hpp"
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

const char* version() { return HOROLAB_VERSION; }

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

namespace {

const std::set<std::string> kConfigKeys = {
    "first",         "second",  "c",     "schedule", "horizon",      "window_radius", "margin",
    "n_range",       "graph_n", "T",     "eps",      "cost_eps",     "kernel",        "seeds",
    "corner_seeds",  "master_seed", "output", "threads", "enumeration_cap"};

template <typename T>
T field(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc[key].is_null()) return fallback;
  try {
    return doc[key].get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string schedule_name(ScheduleKind k) { return k == ScheduleKind::kLinear ? "linear" : "constructed"; }

std::string describe(double v) { return format_double(v); }

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!kConfigKeys.count(key)) throw InputError("config: unknown key '" + key + "'");
  }
  ExperimentConfig cfg;
  if (doc.contains("first")) cfg.first = GroupSpec::from_json(doc["first"]);
  if (doc.contains("second")) cfg.second = GroupSpec::from_json(doc["second"]);
  if (doc.contains("c") && !doc["c"].is_null()) cfg.c = field<double>(doc, "c", 1.0);
  if (doc.contains("schedule")) {
    const auto s = field<std::string>(doc, "schedule", "constructed");
    if (s == "constructed") {
      cfg.schedule = ScheduleKind::kConstructed;
    } else if (s == "linear") {
      cfg.schedule = ScheduleKind::kLinear;
    } else {
      throw InputError("config: schedule must be 'constructed' or 'linear'");
    }
  }
  cfg.horizon = field(doc, "horizon", cfg.horizon);
  cfg.window_radius = field(doc, "window_radius", cfg.window_radius);
  cfg.margin = field(doc, "margin", cfg.margin);
  if (doc.contains("n_range")) {
    const auto r = field<std::vector<int>>(doc, "n_range", {});
    if (r.size() != 2) throw InputError("config: n_range must be [first, last]");
    cfg.n_first = r[0];
    cfg.n_last = r[1];
  }
  cfg.graph_n = field(doc, "graph_n", cfg.graph_n);
  cfg.T = field(doc, "T", cfg.T);
  cfg.eps = field(doc, "eps", cfg.eps);
  cfg.cost_eps = field(doc, "cost_eps", cfg.cost_eps);
  if (doc.contains("kernel")) {
    const auto& k = doc["kernel"];
    if (!k.is_object()) throw InputError("config: kernel must be an object");
    for (const auto& [key, _] : k.items()) {
      if (key != "max_radius") throw InputError("config: unknown kernel key '" + key + "'");
    }
    cfg.kernel_radius = field(k, "max_radius", cfg.kernel_radius);
  }
  cfg.seeds = field(doc, "seeds", cfg.seeds);
  cfg.corner_seeds = field(doc, "corner_seeds", cfg.corner_seeds);
  cfg.master_seed = field(doc, "master_seed", cfg.master_seed);
  cfg.output = field(doc, "output", cfg.output);
  cfg.threads = field(doc, "threads", cfg.threads);
  cfg.cap = field(doc, "enumeration_cap", cfg.cap);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

json ExperimentConfig::to_json() const {
  json doc;
  doc["first"] = first.to_json();
  doc["second"] = second.to_json();
  doc["c"] = c ? json(*c) : json(nullptr);
  doc["schedule"] = schedule_name(schedule);
  doc["horizon"] = horizon;
  doc["window_radius"] = window_radius;
  doc["margin"] = margin;
  doc["n_range"] = {n_first, n_last};
  doc["graph_n"] = graph_n;
  doc["T"] = T;
  doc["eps"] = eps;
  doc["cost_eps"] = cost_eps;
  doc["kernel"] = {{"max_radius", kernel_radius}};
  doc["seeds"] = seeds;
  doc["corner_seeds"] = corner_seeds;
  doc["master_seed"] = master_seed;
  doc["output"] = output;
  doc["threads"] = threads;
  doc["enumeration_cap"] = cap;
  return doc;
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("config: " + what);
  };
  need(!c || (std::isfinite(*c) && *c > 0.0), "c must be positive");
  need(horizon >= 2 && horizon <= 400, "horizon must lie in [2, 400]");
  need(std::isfinite(window_radius) && window_radius > 0.0, "window_radius must be positive");
  need(std::isfinite(margin) && margin >= 0.0 && margin < window_radius, "margin must lie in [0, window_radius)");
  need(n_first >= 1 && n_last >= n_first, "n_range must satisfy 1 <= first <= last");
  need(graph_n >= 1, "graph_n must be >= 1");
  need(!T.empty(), "T must be nonempty");
  for (int t : T) need(t >= 0, "T values must be >= 0");
  need(!eps.empty(), "eps must be nonempty");
  for (double e : eps) need(std::isfinite(e) && e >= 0.0 && e <= 1.0, "eps values must lie in [0, 1], got " + describe(e));
  need(std::isfinite(cost_eps) && cost_eps >= 0.0 && cost_eps <= 1.0, "cost_eps must lie in [0, 1]");
  need(std::isfinite(kernel_radius) && kernel_radius >= 0.0, "kernel.max_radius must be >= 0");
  need(seeds >= 1, "seeds must be >= 1");
  need(corner_seeds >= 0, "corner_seeds must be >= 0");
  need(threads >= 0, "threads must be >= 0");
  need(cap >= 1, "enumeration_cap must be >= 1");
  need(!output.empty(), "output must be nonempty");
}

bool RunResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"growth", "schedule", "diamond", "process",
                                                 "graphing", "touching", "prop13", "all"};
  return names;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = SIZE_MAX;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        // Report the failure of the least index, as a serial loop would.
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Resolved experiment

namespace {

GrowthSeries counted_up_to(const GroupSpec& spec, int horizon) {
  for (int h = horizon; h >= 1; --h) {
    try {
      return counted_growth_series(spec, h);
    } catch (const ResourceError&) {
    }
  }
  throw ResourceError("growth series of " + spec.name() + " overflows at every horizon");
}

struct Context {
  ExperimentConfig cfg;
  Group first;
  Group second;
  GrowthSeries s1;
  GrowthSeries s2;
  double c = 1.0;
  double kernel_radius = 0.0;
  std::optional<SlopeSchedule> sched;

  explicit Context(const ExperimentConfig& config)
      : cfg(config), first(config.first), second(config.second) {
    if (!is_infinite(cfg.first) || !is_infinite(cfg.second)) {
      throw InputError("both factors must be infinite groups");
    }
    s1 = counted_up_to(cfg.first, cfg.horizon + 8);
    if (cfg.c) {
      c = *cfg.c;
    } else {
      const auto probe = counted_up_to(cfg.second, cfg.horizon + 8);
      c = ProductMetric::default_slope(growth_rate(first, s1), growth_rate(second, probe));
    }
    s2 = counted_up_to(cfg.second, static_cast<int>(std::ceil(std::max(1.0, c) * (cfg.horizon + 8))));
    kernel_radius = cfg.kernel_radius > 0.0 ? cfg.kernel_radius : 2.0 * cfg.window_radius;
  }

  const SlopeSchedule& schedule() {
    if (!sched) {
      if (cfg.schedule == ScheduleKind::kLinear) {
        sched = linear_schedule(c, cfg.horizon, std::max(s1.generator_count, s2.generator_count) + 1);
      } else {
        if (!is_nonamenable(cfg.first) ||
            !is_nonamenable(cfg.second)) {
          throw InputError("the constructed schedule needs nonamenable factors; use \"schedule\": \"linear\"");
        }
        sched = build_schedule(s1, s2, c, cfg.horizon);
      }
    }
    return *sched;
  }

  /// Last breakpoint index usable for tables.
  int n_last() {
    const int last = std::min(cfg.n_last, schedule().breakpoints() - 1);
    if (last < cfg.n_first) {
      throw InputError("n_range starts past the last breakpoint (" + std::to_string(schedule().breakpoints() - 1) +
                       "); raise the horizon");
    }
    return last;
  }

  std::vector<std::uint64_t> seed_list(int count) const {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < count; ++i) out.push_back(run_seed(cfg.master_seed, static_cast<std::uint64_t>(i)));
    return out;
  }

  ProcessSpace space() {
    return ProcessSpace(first, second, s1, s2, schedule(), c, cfg.window_radius, cfg.graph_n, std::nullopt, cfg.cap);
  }

  PercolationKernel kernel() const { return PercolationKernel::geometric(s1, s2, c, kernel_radius); }

  json resolved() const {
    auto doc = cfg.to_json();
    doc["c"] = c;
    doc["kernel"]["max_radius"] = kernel_radius;
    return doc;
  }
};

struct Out {
  fs::path dir;
  std::string prefix;  // relative path recorded in the result
  RunResult* result;

  fs::path file(const std::string& name) const {
    result->files.push_back(prefix.empty() ? name : prefix + "/" + name);
    return dir / name;
  }
  void check(std::string name, bool pass, std::string detail) const {
    result->checks.push_back({std::move(name), pass, std::move(detail), 0.0});
  }
};

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sem(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// ---------------------------------------------------------------------------
// growth

void run_growth(Context& ctx, const Out& out) {
  CsvWriter csv(out.file("growth.csv"), {"factor", "group", "n", "volume", "sphere", "rate", "source"});
  PlotData plot;
  const std::size_t bfs_limit = std::min<std::size_t>(ctx.cfg.cap, 1'000'000);
  bool agree = true;
  std::string detail;
  for (int f = 0; f < 2; ++f) {
    const std::string factor = f == 0 ? "first" : "second";
    const Group& g = f == 0 ? ctx.first : ctx.second;
    const GrowthSeries& counted = f == 0 ? ctx.s1 : ctx.s2;
    const int top = std::min(counted.horizon(), ctx.cfg.horizon);
    check_growth_invariants(counted, true);
    int nb = 0;
    while (nb < top && counted.volume(nb + 1) <= bfs_limit) ++nb;
    const auto bfs = growth_series(g, std::max(nb, 1), ctx.cfg.cap);
    check_growth_invariants(bfs, true);
    for (int n = 0; n <= std::max(nb, 1); ++n) {
      const auto un = static_cast<std::size_t>(n);
      csv.cell(factor).cell(g.spec().name()).cell(n).cell(bfs.volumes[un]).cell(bfs.spheres[un]);
      csv.cell(bfs.rate_estimates[un]).cell("bfs");
      csv.end();
      if (bfs.volumes[un] != counted.volumes[un]) agree = false;
    }
    for (int n = 0; n <= top; ++n) {
      const auto un = static_cast<std::size_t>(n);
      csv.cell(factor).cell(g.spec().name()).cell(n).cell(counted.volumes[un]).cell(counted.spheres[un]);
      csv.cell(counted.rate_estimates[un]).cell("counted");
      csv.end();
      if (n >= 1) {
        plot.add(factor + "_rate", n, counted.rate_estimates[un]);
        plot.add(factor + "_log_volume", n, std::log(static_cast<double>(counted.volumes[un])));
      }
    }
    detail += (detail.empty() ? "" : "; ") + factor + ": bfs to n=" + std::to_string(std::max(nb, 1));

    const int br = std::min(3, counted.horizon());
    if (counted.volume(br) <= bfs_limit) {
      const CayleyBall ball(g, br, ctx.cfg.cap);
      CsvWriter bcsv(out.file("ball_" + factor + ".csv"), {"canonical_word", "distance"});
      for (std::size_t i = 0; i < ball.size(); ++i) {
        bcsv.cell(g.format(ball.element(i))).cell(ball.distance(i));
        bcsv.end();
      }
    }
  }
  plot.write(out.file("plot_growth.dat"));
  out.check("growth: bfs volumes equal counted volumes", agree, detail);
}

// ---------------------------------------------------------------------------
// schedule

void run_schedule(Context& ctx, const Out& out) {
  const auto& s = ctx.schedule();
  if (!s.linear) check_schedule(s, ctx.s1, ctx.s2);
  CsvWriter csv(out.file("schedule.csv"), {"n", "f_n", "g_n", "segment_index", "slope"});
  PlotData plot;
  for (int x = 0; x <= s.horizon && x < static_cast<int>(s.f.size()); ++x) {
    const auto ux = static_cast<std::size_t>(x);
    const int seg = s.segment_of.empty() ? 0 : s.segment_of[ux];
    const long double slope = s.segments.empty() ? static_cast<long double>(s.c)
                                                 : s.segments[static_cast<std::size_t>(seg)].slope;
    csv.cell(x).cell(s.f[ux]).cell(s.g.empty() ? static_cast<long double>(s.c * x) : s.g[ux]).cell(seg).cell(slope);
    csv.end();
    plot.add("f", x, s.f[ux]);
    plot.add("cx", x, s.c * x);
  }

  json doc;
  doc["c"] = s.c;
  doc["M"] = s.M;
  doc["linear"] = s.linear;
  doc["truncated"] = s.truncated;
  doc["horizon"] = s.horizon;
  auto bps = json::array();
  for (int j = 0; j < s.breakpoints(); ++j) {
    const auto uj = static_cast<std::size_t>(j);
    json b = {{"j", j}, {"r", s.r[uj]}, {"r_prime", s.r_prime[uj]}};
    if (uj < s.ratios.size()) {
      b["ratio"] = static_cast<double>(s.ratios[uj]);
      plot.add("ratio", s.r[uj], static_cast<double>(s.ratios[uj]));
    }
    bps.push_back(b);
  }
  doc["breakpoints"] = bps;
  auto segs = json::array();
  for (const auto& seg : s.segments) {
    segs.push_back({{"index", seg.index},
                    {"down", seg.down},
                    {"slope", static_cast<double>(seg.slope)},
                    {"start", seg.start},
                    {"end", seg.end},
                    {"completed", seg.completed}});
  }
  doc["segments"] = segs;
  write_json(out.file("breakpoints.json"), doc);

  CsvWriter al(out.file("almost_linear.csv"), {"m", "N", "max_deviation", "tail_deviation"});
  bool ok = true;
  std::string detail;
  for (const auto& row : verify_almost_linear(s, 5)) {
    al.cell(row.m);
    if (row.N) {
      al.cell(*row.N);
    } else {
      al.empty();
    }
    al.cell(row.max_deviation).cell(row.tail_deviation);
    al.end();
    plot.add("max_deviation", row.m, row.max_deviation);
    ok = ok && row.N.has_value() && row.tail_deviation <= 1.0 + 1e-12;
    detail += "N(" + std::to_string(row.m) + ")=" + (row.N ? std::to_string(*row.N) : std::string("none")) + " ";
  }
  plot.write(out.file("plot_schedule.dat"));
  out.check("schedule: f(0) = 0", s.f_at(0) == 0, "f(0)=" + std::to_string(s.f_at(0)));
  out.check("schedule: deviations <= 1 beyond N(m), m <= 5", ok, detail);
}

// ---------------------------------------------------------------------------
// diamond

void run_diamond(Context& ctx, const Out& out) {
  const auto& s = ctx.schedule();
  const int n_last = ctx.n_last();
  const std::uint64_t enum_limit = std::min<std::uint64_t>(ctx.cfg.cap, 1'000'000);
  PlotData plot;

  CsvWriter vol(out.file("volumes.csv"), {"n", "r", "r_prime", "volume", "enumerated"});
  bool vol_ok = true;
  int enumerated = 0;
  for (int n = ctx.cfg.n_first; n <= n_last; ++n) {
    const int r = s.radius(n);
    const auto v = diamond_volume(s, ctx.s1, ctx.s2, n);
    vol.cell(n).cell(r).cell(s.radius_prime(n)).cell(v);
    if (v <= enum_limit && ctx.s1.volume(r) <= enum_limit && ctx.s2.volume(s.f_at(r)) <= enum_limit) {
      const auto pts = enumerate_diamond(s, r, ProductPoint{ctx.first.identity(), ctx.second.identity()}, ctx.first,
                                         ctx.second, ctx.cfg.cap);
      vol.cell(pts.size());
      vol_ok = vol_ok && pts.size() == v;
      ++enumerated;
    } else {
      vol.empty();
    }
    vol.end();
    plot.add("log_volume", n, std::log(static_cast<double>(v)));
  }
  out.check("diamond: enumeration equals the slice formula", vol_ok,
            std::to_string(enumerated) + " radii enumerated");

  CsvWriter corners(out.file("corners.csv"), {"n", "T", "corner_count", "corner_bound", "ratio", "probability"});
  for (int T : ctx.cfg.T) {
    for (int n = ctx.cfg.n_first; n <= n_last; ++n) {
      const auto row = corner_count(s, ctx.s1, ctx.s2, n, T);
      corners.cell(n).cell(T).cell(row.count).cell(row.bound).cell(row.ratio).cell(row.probability);
      corners.end();
      plot.add("corner_ratio_T" + std::to_string(T), n, static_cast<double>(row.ratio));
    }
  }

  CsvWriter dom(out.file("dominance.csv"), {"n", "v_n", "max_factor", "dominance_ratio", "lower_bound", "holds"});
  bool dom_ok = true;
  for (const auto& row : growth_dominance(s, ctx.s1, ctx.s2, ctx.cfg.n_first, n_last)) {
    dom.cell(row.n).cell(row.volume).cell(row.max_factor).cell(row.ratio).cell(row.lower_bound).cell(row.holds);
    dom.end();
    dom_ok = dom_ok && row.holds;
    plot.add("dominance_ratio", row.n, static_cast<double>(row.ratio));
    plot.add("dominance_bound", row.n, static_cast<double>(row.lower_bound));
  }
  out.check("diamond: dominance ratio above its lower bound", dom_ok, "");

  // Sandwich: centers pushed out along the inverse of generator 0 in both factors.
  if (ctx.first.first_generator_infinite() && ctx.second.first_generator_infinite()) {
    const int R = static_cast<int>(std::floor(ctx.cfg.window_radius));
    const int g1 = ctx.first.inverse_generator(0);
    const int g2 = ctx.second.inverse_generator(0);
    auto b1 = std::make_shared<const CayleyBall>(ctx.first, first_radius_for(R), ctx.cfg.cap);
    auto b2 = std::make_shared<const CayleyBall>(ctx.second, second_radius_for(R, ctx.c), ctx.cfg.cap);
    const ProductWindow w(b1, b2, ctx.c, R);
    const ProductHorofunction theta(Horofunction::from_ray(ctx.first, Ray{{}, {g1}}, first_radius_for(R)),
                                    Horofunction::from_ray(ctx.second, Ray{{}, {g2}}, second_radius_for(R, ctx.c)),
                                    ctx.c);
    auto power = [](const Group& g, int gen, int k) { return g.canon(Word(static_cast<std::size_t>(k), gen)); };
    auto center = [&](int n) {
      const int r = s.radius(n);
      const int k = r / 2;
      return ProductPoint{power(ctx.first, g1, k), power(ctx.second, g2, s.f_at(r - k))};
    };
    // Both center coordinates at least 2R away from the window.
    int n0 = 1;
    while (n0 < s.breakpoints() && (s.radius(n0) / 2 < 2 * R || s.f_at(s.radius(n0) - s.radius(n0) / 2) < 2 * R)) ++n0;
    CsvWriter sw(out.file("sandwich.csv"),
                 {"n", "r", "delta", "members", "lower_violations", "upper_violations", "vacuous"});
    if (n0 < s.breakpoints()) {
      const auto report = sandwich_report(s, n0, s.breakpoints() - 1, center, w, theta);
      for (const auto& row : report.rows) {
        sw.cell(row.n).cell(row.r).cell(row.delta).cell(row.members).cell(row.lower_violations);
        sw.cell(row.upper_violations).cell(row.vacuous);
        sw.end();
      }
      out.check("diamond: horoball sandwich from a reported N0", report.first_holding.has_value(),
                report.first_holding ? "N0=" + std::to_string(*report.first_holding) : "no holding tail");
    } else {
      out.check("diamond: horoball sandwich from a reported N0", true, "skipped: no breakpoint with centers 2R out");
    }
  }
  plot.write(out.file("plot_diamond.dat"));
}

// ---------------------------------------------------------------------------
// process

void run_process(Context& ctx, const Out& out) {
  const auto space = ctx.space();
  const auto seeds = ctx.seed_list(ctx.cfg.seeds);
  std::vector<IncidenceStats> stats(seeds.size());
  std::vector<DiamondProcess> first_process(1);
  std::vector<std::size_t> centers(seeds.size()), diamonds(seeds.size());
  parallel_for(seeds.size(), ctx.cfg.threads, [&](std::size_t i) {
    auto p = sample_diamond_process(space, seeds[i]);
    stats[i] = incidence_stats(space, p);
    stats[i].counts.clear();
    centers[i] = p.centers;
    diamonds[i] = p.diamonds.size();
    if (i == 0) first_process[0] = std::move(p);
  });

  CsvWriter inc(out.file("incidence.csv"), {"seed", "centers", "diamonds", "mean", "variance", "expected_mean"});
  std::vector<double> means;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    inc.cell(seeds[i]).cell(centers[i]).cell(diamonds[i]).cell(stats[i].mean).cell(stats[i].variance);
    inc.cell(stats[i].expected_mean);
    inc.end();
    means.push_back(stats[i].mean);
  }
  const double m = mean(means);
  const double se = sem(means);
  const double expected = stats.front().expected_mean;
  out.check("process: incidence mean within 4 SE of its expectation", std::fabs(m - expected) <= 4 * se + 1e-12,
            "mean " + describe(m) + " expected " + describe(expected));

  {
    auto jl = open_output(out.file("process.jsonl"));
    for (const auto& d : first_process[0].diamonds) {
      const auto i1 = static_cast<std::size_t>(space.outer_first(d.outer_index));
      const auto i2 = static_cast<std::size_t>(space.outer_second(d.outer_index));
      json row = {{"center", {ctx.first.format(space.first_ball().element(i1)),
                              ctx.second.format(space.second_ball().element(i2))}},
                  {"mark", d.mark},
                  {"members", d.members.size()}};
      jl << row.dump() << '\n';
    }
  }

  const auto& s = ctx.schedule();
  const int n_last = ctx.n_last();
  const auto table = corner_event_probability(ctx.first, ctx.second, s, ctx.s1, ctx.s2, ctx.cfg.n_first, n_last,
                                              ctx.cfg.T, ctx.seed_list(ctx.cfg.corner_seeds));
  CsvWriter ce(out.file("corner_events.csv"),
               {"n", "T", "corner_count", "volume", "exact", "empirical", "standard_error"});
  PlotData plot;
  for (const auto& row : table.rows) {
    ce.cell(row.n).cell(row.T).cell(row.corner_count).cell(row.volume).cell(row.exact);
    if (row.empirical) {
      ce.cell(*row.empirical).cell(*row.standard_error);
      plot.add("corner_empirical_T" + std::to_string(row.T), row.n, *row.empirical, *row.standard_error);
    } else {
      ce.empty().empty();
    }
    ce.end();
    plot.add("corner_exact_T" + std::to_string(row.T), row.n, static_cast<double>(row.exact));
  }

  CsvWriter hits(out.file("hits.csv"), {"n", "T", "count", "volume", "ratio", "bound", "holds"});
  bool hit_ok = true;
  for (int T : ctx.cfg.T) {
    for (int n = ctx.cfg.n_first; n <= n_last; ++n) {
      const auto row = hit_probability(s, ctx.s1, ctx.s2, n, T);
      hits.cell(row.n).cell(row.T).cell(row.count).cell(row.volume).cell(row.ratio).cell(row.bound).cell(row.holds);
      hits.end();
      hit_ok = hit_ok && row.holds;
      plot.add("hit_ratio_T" + std::to_string(T), n, static_cast<double>(row.ratio));
    }
  }
  out.check("process: hit ratios below (1 - eps')^-T", hit_ok, "");
  plot.write(out.file("plot_process.dat"));
}

// ---------------------------------------------------------------------------
// graphing

std::string status_name(Pi1Status s) {
  switch (s) {
    case Pi1Status::kActive:
      return "active";
    case Pi1Status::kCenter:
      return "center";
    case Pi1Status::kExhausted:
      return "exhausted";
  }
  return "?";
}

void run_graphing_cmd(Context& ctx, const Out& out) {
  const auto space = ctx.space();
  std::vector<double> eps = ctx.cfg.eps;
  eps.push_back(ctx.cfg.cost_eps);
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  const double eps_max = eps.back();
  const PercolationSampler sampler(space.window_ptr(), ctx.kernel(), eps_max, ctx.cfg.cap);
  const auto keys = window_keys(space);
  const auto seeds = ctx.seed_list(ctx.cfg.seeds);

  struct PerSeed {
    std::vector<SeedCost> costs;  // per eps
    std::vector<char> ok;
    std::string skipped;
    std::size_t parallel_failures = 0;
  };
  std::vector<PerSeed> per(seeds.size());
  parallel_for(seeds.size(), ctx.cfg.threads, [&](std::size_t i) {
    const auto process = sample_diamond_process(space, seeds[i]);
    const auto sample = sampler.sample(seeds[i], keys);
    for (double e : eps) {
      const auto run = run_graphing(space, process, sample, e);
      per[i].parallel_failures += run.pi1.parallel_failures;
      try {
        per[i].costs.push_back(seed_cost(space, run, ctx.cfg.margin));
        per[i].ok.push_back(1);
      } catch (const InputError& err) {
        SeedCost blank;
        blank.seed = seeds[i];
        blank.eps = e;
        per[i].costs.push_back(blank);
        per[i].ok.push_back(0);
        per[i].skipped = err.what();
      }
    }
  });

  CsvWriter csv(out.file("cost_seeds.csv"),
                {"seed", "eps", "marked", "interior", "pi1_half_degree", "pi3_half_degree", "pi3_half_degree_raw",
                 "boundary_deficit", "lambda_hat", "pi3_mean_degree", "lambda_full", "pi5_mean_degree", "pi5_lhs",
                 "pi5_rhs", "pi5_holds", "largest_fraction", "components", "flagged_components"});
  std::size_t skipped = 0;
  std::size_t parallel_failures = 0;
  bool monotone = true;
  bool pi5_all = true;
  for (const auto& p : per) {
    parallel_failures += p.parallel_failures;
    double prev = -1.0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const auto& sc = p.costs[k];
      if (!p.ok[k]) {
        ++skipped;
        continue;
      }
      csv.cell(sc.seed).cell(sc.eps).cell(sc.marked).cell(sc.interior).cell(sc.pi1_half_degree);
      csv.cell(sc.pi3_half_degree).cell(sc.pi3_half_degree_raw).cell(sc.boundary_deficit).cell(sc.lambda_hat);
      csv.cell(sc.pi3_mean_degree).cell(sc.lambda_full).cell(sc.pi5_mean_degree).cell(sc.pi5_lhs).cell(sc.pi5_rhs);
      csv.cell(sc.pi5_holds).cell(sc.largest_fraction).cell(sc.components).cell(sc.flagged_components);
      csv.end();
      pi5_all = pi5_all && sc.pi5_holds;
      if (sc.largest_fraction < prev) monotone = false;
      prev = sc.largest_fraction;
    }
  }

  auto reports = json::array();
  PlotData plot;
  bool cost_ok = true;
  std::string cost_detail;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    std::vector<SeedCost> rows;
    for (const auto& p : per) {
      if (p.ok[k]) rows.push_back(p.costs[k]);
    }
    if (rows.empty()) continue;
    const auto report = cost_report(rows, ctx.cfg.margin);
    reports.push_back(report.to_json());
    for (const auto& row : report.rows) {
      plot.add(to_string(row.stage) + "_half_degree", eps[k], row.half_degree_mean, row.half_degree_se);
    }
    plot.add("largest_fraction", eps[k], report.largest_fraction);
    if (eps[k] == ctx.cfg.cost_eps) {
      const auto& r3 = report.row(Stage::kPi3);
      const double hi = 1.0 + ctx.cfg.cost_eps + 3 * r3.half_degree_se + r3.boundary_deficit;
      cost_ok = r3.half_degree_mean >= 1.0 && r3.half_degree_mean <= hi;
      cost_detail = "pi3 half-degree " + describe(r3.half_degree_mean) + " in [1, " + describe(hi) + "]";
    }
  }
  write_json(out.file("cost_report.json"), reports);
  out.check("graphing: pi3 half-degree window at cost_eps", cost_ok, cost_detail);
  out.check("graphing: pi5 bound on every run", pi5_all, "");
  out.check("graphing: largest component fraction nondecreasing in eps", monotone, "");
  out.check("graphing: pi1 parallel property", parallel_failures == 0,
            std::to_string(parallel_failures) + " failures");
  out.check("graphing: every run had a nonempty interior", skipped == 0,
            skipped ? std::to_string(skipped) + " runs skipped: " + per.front().skipped : "");

  // One full dump: the first seed at cost_eps.
  const auto process = sample_diamond_process(space, seeds[0]);
  const auto run = run_graphing(space, process, sampler.sample(seeds[0], keys), ctx.cfg.cost_eps);
  const auto& w = space.window();
  CsvWriter vcsv(out.file("vertices.csv"),
                 {"marked", "window", "first_word", "second_word", "diamond", "mark", "pi1_status", "kept"});
  for (std::size_t v = 0; v < run.marked.size(); ++v) {
    const auto& mp = run.marked.points[v];
    const auto pt = w.point(static_cast<std::size_t>(mp.point));
    vcsv.cell(v).cell(mp.point).cell(ctx.first.format(pt.first)).cell(ctx.second.format(pt.second));
    vcsv.cell(mp.diamond).cell(mp.mark).cell(status_name(run.pi1.status[v])).cell(run.overlap.kept[v] != 0);
    vcsv.end();
  }
  CsvWriter ecsv(out.file("edges.csv"), {"stage", "source", "target"});
  for (const WindowGraph* g : {&run.pi1.graph, &run.pi2, &run.pi3, &run.induced.forest, &run.induced.pi4,
                               &run.induced.pi5}) {
    for (const auto& e : g->edges) {
      ecsv.cell(to_string(g->stage)).cell(e.first).cell(e.second);
      ecsv.end();
    }
  }
  plot.write(out.file("plot_graphing.dat"));
}

// ---------------------------------------------------------------------------
// touching

void run_touching(Context& ctx, const Out& out) {
  const int domain = 10;
  auto rays_for = [](const Group& g) {
    const int b = g.generator_count() > 2 ? 2 : 0;
    std::vector<Ray> rays{Ray{{}, {0}}, Ray{{}, {b}}};
    if (b != 0) rays.push_back(Ray{{}, {0, b}});
    return rays;
  };
  const auto r1 = rays_for(ctx.first);
  const auto r2 = rays_for(ctx.second);
  std::vector<Horofunction> h1, h2;
  for (const auto& r : r1) h1.push_back(Horofunction::from_ray(ctx.first, r, domain));
  for (const auto& r : r2) h2.push_back(Horofunction::from_ray(ctx.second, r, domain));

  // Two configurations: (h1 = (a, b), h2 = (ab, a)) and the mirrored one.
  struct Config {
    std::string name;
    ProductHorofunction t1, t2;
  };
  std::vector<Config> configs;
  configs.push_back({"mixed", ProductHorofunction(h1[0], h2.back(), ctx.c),
                     ProductHorofunction(h1.back(), h2[0], ctx.c)});
  configs.push_back({"aligned", ProductHorofunction(h1[0], h2[0], ctx.c), ProductHorofunction(h1[1], h2[1], ctx.c)});

  const CayleyBall near1(ctx.first, 1);
  const CayleyBall near2(ctx.second, 1);
  std::vector<ProductPoint> pts;
  for (std::size_t i = 0; i < near1.size(); ++i) {
    for (std::size_t j = 0; j < near2.size(); ++j) pts.push_back({near1.element(i), near2.element(j)});
  }

  CsvWriter trace(out.file("touching.csv"), {"config", "pair", "j", "distance", "bound", "theta1", "theta2"});
  CsvWriter summary(out.file("touching_summary.csv"),
                    {"config", "pair", "x1", "x2", "k", "k_prime", "bound", "max_distance", "bound_holds",
                     "monotone1", "monotone2", "truncated"});
  PlotData plot;
  bool ok = true;
  std::size_t traces = 0;
  auto word = [&](const ProductPoint& p) {
    return "(" + ctx.first.format(p.first) + "," + ctx.second.format(p.second) + ")";
  };
  for (const auto& cfg : configs) {
    std::size_t pair = 0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
      for (std::size_t b = 0; b < pts.size(); b += 3, ++pair) {
        const auto p = connecting_paths(cfg.t1, cfg.t2, pts[a], pts[b], 5);
        const auto t = touching_paths(cfg.t1, cfg.t2, p.eta, p.k, p.eta_prime, p.k_prime);
        double worst = 0.0;
        for (std::size_t j = 0; j < t.distance.size(); ++j) {
          trace.cell(cfg.name).cell(pair).cell(j).cell(t.distance[j]).cell(t.bound).cell(t.theta1[j]);
          trace.cell(t.theta2[j]);
          trace.end();
          worst = std::max(worst, t.distance[j]);
        }
        summary.cell(cfg.name).cell(pair).cell(word(pts[a])).cell(word(pts[b])).cell(p.k).cell(p.k_prime);
        summary.cell(t.bound).cell(worst).cell(t.bound_holds).cell(t.monotone1).cell(t.monotone2);
        summary.cell(t.truncated || p.truncated);
        summary.end();
        ok = ok && t.bound_holds && t.monotone1 && t.monotone2;
        plot.add(cfg.name + "_slack", static_cast<double>(pair), t.bound - worst);
        ++traces;
      }
    }
  }
  {
    const auto h = Horofunction::from_ray(ctx.first, r1[0], 3);
    CsvWriter hcsv(out.file("horofunction.csv"), {"word", "value", "backing_kind"});
    for (const auto& row : dump(h)) {
      hcsv.cell(row.word).cell(row.value).cell(row.backing);
      hcsv.end();
    }
  }
  plot.write(out.file("plot_touching.dat"));
  out.check("touching: distance bound and monotone traces", ok, std::to_string(traces) + " traces");
}

// ---------------------------------------------------------------------------
// prop13

void run_prop13(Context& ctx, const Out& out) {
  const double R = ctx.cfg.window_radius;
  auto b1 = std::make_shared<const CayleyBall>(ctx.first, first_radius_for(R), ctx.cfg.cap);
  auto b2 = std::make_shared<const CayleyBall>(ctx.second, second_radius_for(R, ctx.c), ctx.cfg.cap);
  auto window = std::make_shared<const ProductWindow>(b1, b2, ctx.c, R);
  std::vector<double> eps = ctx.cfg.eps;
  eps.push_back(0.0);
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  const LineBaseline base(window, ctx.kernel(), eps.back(), std::max(1.0, ctx.cfg.margin));
  const auto seeds = ctx.seed_list(ctx.cfg.seeds);
  std::vector<std::vector<LineRun>> runs(seeds.size());
  parallel_for(seeds.size(), ctx.cfg.threads, [&](std::size_t i) {
    const auto sample = base.sample(seeds[i]);
    for (double e : eps) {
      auto r = base.run(sample, e);
      r.seed = seeds[i];
      runs[i].push_back(r);
    }
  });

  CsvWriter csv(out.file("prop13.csv"), {"seed", "eps", "points", "components", "largest_fraction", "interior",
                                         "half_degree", "expected_half_degree", "lines_exact"});
  bool exact = true;
  bool monotone = true;
  for (const auto& per : runs) {
    for (std::size_t k = 0; k < per.size(); ++k) {
      const auto& r = per[k];
      csv.cell(r.seed).cell(r.eps).cell(r.points).cell(r.components).cell(r.largest_fraction).cell(r.interior);
      csv.cell(r.half_degree).cell(r.expected_half_degree).cell(r.lines_exact);
      csv.end();
      if (r.eps == 0.0) exact = exact && r.lines_exact && r.half_degree == 1.0;
      if (k > 0 && (r.components > per[k - 1].components || r.largest_fraction < per[k - 1].largest_fraction)) {
        monotone = false;
      }
    }
  }
  PlotData plot;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    std::vector<double> frac, half, expect;
    for (const auto& per : runs) {
      frac.push_back(per[k].largest_fraction);
      half.push_back(per[k].half_degree);
      expect.push_back(per[k].expected_half_degree);
    }
    plot.add("largest_fraction", eps[k], mean(frac), sem(frac));
    plot.add("half_degree", eps[k], mean(half), sem(half));
    plot.add("expected_half_degree", eps[k], mean(expect), sem(expect));
  }
  plot.write(out.file("plot_prop13.dat"));
  out.check("prop13: eps = 0 is the coset-line partition with half-degree 1", exact,
            std::to_string(base.line_count()) + " line segments");
  out.check("prop13: merging monotone in eps", monotone, "");
}

void dispatch(const std::string& sub, Context& ctx, const Out& out) {
  if (sub == "growth") return run_growth(ctx, out);
  if (sub == "schedule") return run_schedule(ctx, out);
  if (sub == "diamond") return run_diamond(ctx, out);
  if (sub == "process") return run_process(ctx, out);
  if (sub == "graphing") return run_graphing_cmd(ctx, out);
  if (sub == "touching") return run_touching(ctx, out);
  if (sub == "prop13") return run_prop13(ctx, out);
  throw InputError("unknown subcommand '" + sub + "'");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run(const std::string& subcommand, const ExperimentConfig& config) {
  config.validate();
  if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
    throw InputError("unknown subcommand '" + subcommand + "'");
  }
  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx(config);

  RunResult result;
  result.subcommand = subcommand;
  result.directory = config.output;
  result.resolved = ctx.resolved();
  fs::create_directories(result.directory);

  json timings = json::object();
  if (subcommand == "all") {
    for (const auto& sub : subcommands()) {
      if (sub == "all") continue;
      const auto s0 = std::chrono::steady_clock::now();
      dispatch(sub, ctx, Out{result.directory / sub, sub, &result});
      timings[sub] = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
    }
    const auto criteria = evaluate_criteria(config.master_seed, config.threads);
    CsvWriter csv(result.directory / "acceptance.csv", {"criterion", "name", "pass", "detail"});
    result.files.push_back("acceptance.csv");
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      csv.cell(i + 1).cell(criteria[i].name).cell(criteria[i].pass).cell(criteria[i].detail);
      csv.end();
      timings["criterion_" + std::to_string(i + 1)] = criteria[i].seconds;
      result.checks.push_back(criteria[i]);
    }
  } else {
    dispatch(subcommand, ctx, Out{result.directory, "", &result});
  }

  json manifest;
  manifest["tool"] = "horolab";
  manifest["version"] = version();
  manifest["subcommand"] = subcommand;
  manifest["config"] = result.resolved;
  manifest["files"] = result.files;
  auto checks = json::array();
  for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  manifest["checks"] = checks;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  manifest["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["timings"] = timings;
  write_json(result.directory / "manifest.json", manifest);
  return result;
}

}  // namespace horolab
