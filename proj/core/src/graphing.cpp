#include "horolab/graphing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "horolab/errors.hpp"
#include "horolab/random.hpp"

namespace horolab {

namespace {

class Dsu {
 public:
  explicit Dsu(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }
  std::size_t size(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

Edge ordered(std::int32_t a, std::int32_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

void sort_unique(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

// Compressed adjacency of an undirected edge list.
struct Adjacency {
  std::vector<std::size_t> offsets;
  std::vector<std::int32_t> targets;

  Adjacency(std::size_t n, const std::vector<Edge>& edges) : offsets(n + 1, 0) {
    for (const auto& [a, b] : edges) {
      ++offsets[static_cast<std::size_t>(a) + 1];
      ++offsets[static_cast<std::size_t>(b) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    targets.resize(offsets.back());
    auto fill = offsets;
    for (const auto& [a, b] : edges) {
      targets[fill[static_cast<std::size_t>(a)]++] = b;
      targets[fill[static_cast<std::size_t>(b)]++] = a;
    }
  }
  std::size_t degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
};

double mean_of(const std::vector<double>& xs) {
  return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double sq = 0.0;
  for (double x : xs) sq += (x - m) * (x - m);
  return std::sqrt(sq / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::kPi1: return "pi1";
    case Stage::kPi2: return "pi2";
    case Stage::kPi3: return "pi3";
    case Stage::kForest: return "F";
    case Stage::kPi4: return "pi4";
    case Stage::kPi5: return "pi5";
  }
  return "?";
}

std::int32_t MarkedSet::find(std::size_t y, std::int32_t diamond) const {
  for (auto i = offsets[y]; i < offsets[y + 1]; ++i) {
    if (points[static_cast<std::size_t>(i)].diamond == diamond) return i;
  }
  return -1;
}

MarkedSet marked_points(const DiamondProcess& process, std::size_t window_size) {
  MarkedSet set;
  for (std::size_t d = 0; d < process.diamonds.size(); ++d) {
    for (auto y : process.diamonds[d].members) {
      set.points.push_back({y, static_cast<std::int32_t>(d), process.diamonds[d].mark});
    }
  }
  std::sort(set.points.begin(), set.points.end(), [](const MarkedPoint& a, const MarkedPoint& b) {
    if (a.point != b.point) return a.point < b.point;
    if (a.mark != b.mark) return a.mark < b.mark;
    return a.diamond < b.diamond;
  });
  set.offsets.assign(window_size + 1, 0);
  for (const auto& p : set.points) ++set.offsets[static_cast<std::size_t>(p.point) + 1];
  for (std::size_t y = 0; y < window_size; ++y) set.offsets[y + 1] += set.offsets[y];
  return set;
}

Pi1Forest build_pi1(const ProcessSpace& space, const DiamondProcess& process, const MarkedSet& marked) {
  const auto& ball = space.first_ball();
  const auto& group = space.first();
  const auto& window = space.window();
  const int gens = group.generator_count();

  Pi1Forest out;
  out.graph.stage = Stage::kPi1;
  out.graph.directed = true;
  out.graph.vertex_count = marked.size();
  out.status.assign(marked.size(), Pi1Status::kActive);
  out.target.assign(marked.size(), -1);
  std::vector<std::int32_t> step(marked.size(), -1);  // first-ball index of tau(y)

  for (std::size_t v = 0; v < marked.size(); ++v) {
    const auto& mp = marked.points[v];
    const auto& diamond = process.diamonds[static_cast<std::size_t>(mp.diamond)];
    const Element& center = ball.element(static_cast<std::size_t>(space.outer_first(diamond.outer_index)));
    const auto y1 = static_cast<std::size_t>(window.first_index(static_cast<std::size_t>(mp.point)));
    const int d = group.distance(center, ball.element(y1));
    if (d == 0) {
      out.status[v] = Pi1Status::kCenter;
      continue;
    }
    std::int32_t best = -1;
    for (int g = 0; g < gens; ++g) {
      const auto nb = ball.neighbor(y1, g);
      if (nb < 0) throw InvariantViolation("first factor ball too small for a descent step");
      if (group.distance(center, ball.element(static_cast<std::size_t>(nb))) == d - 1 && (best < 0 || nb < best)) {
        best = nb;
      }
    }
    if (best < 0) throw InvariantViolation("no descent step towards the diamond center");
    step[v] = best;
    const auto z = window.find(best, window.second_index(static_cast<std::size_t>(mp.point)));
    if (z < 0) {
      out.status[v] = Pi1Status::kExhausted;
      continue;
    }
    const auto t = marked.find(static_cast<std::size_t>(z), mp.diamond);
    if (t < 0) throw InvariantViolation("descent step left its diamond");
    out.target[v] = t;
    out.graph.edges.emplace_back(static_cast<std::int32_t>(v), t);
  }

  // Points of one diamond with one first coordinate move in parallel.
  std::vector<std::size_t> order(marked.size());
  std::iota(order.begin(), order.end(), 0);
  auto first_of = [&](std::size_t v) { return window.first_index(static_cast<std::size_t>(marked.points[v].point)); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = marked.points[a];
    const auto& pb = marked.points[b];
    if (pa.diamond != pb.diamond) return pa.diamond < pb.diamond;
    if (first_of(a) != first_of(b)) return first_of(a) < first_of(b);
    return a < b;
  });
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && marked.points[order[j]].diamond == marked.points[order[i]].diamond &&
           first_of(order[j]) == first_of(order[i])) {
      ++j;
    }
    std::vector<std::size_t> active;
    for (std::size_t q = i; q < j; ++q) {
      if (out.status[order[q]] == Pi1Status::kActive) active.push_back(order[q]);
    }
    if (active.size() >= 2) {
      ++out.parallel_groups;
      for (auto v : active) {
        const auto t = static_cast<std::size_t>(out.target[v]);
        const auto src = static_cast<std::size_t>(marked.points[v].point);
        const auto dst = static_cast<std::size_t>(marked.points[t].point);
        const bool horizontal = window.second_index(dst) == window.second_index(src);
        if (!horizontal || step[v] != step[active.front()] || window.first_index(dst) != step[v]) {
          ++out.parallel_failures;
        }
      }
    }
    i = j;
  }
  return out;
}

WindowGraph lift_percolation(const MarkedSet& marked, const std::vector<Edge>& open) {
  WindowGraph g;
  g.stage = Stage::kPi2;
  g.vertex_count = marked.size();
  for (const auto& [a, b] : open) {
    for (auto u = marked.offsets[static_cast<std::size_t>(a)]; u < marked.offsets[static_cast<std::size_t>(a) + 1]; ++u) {
      for (auto v = marked.offsets[static_cast<std::size_t>(b)]; v < marked.offsets[static_cast<std::size_t>(b) + 1];
           ++v) {
        g.edges.push_back(ordered(u, v));
      }
    }
  }
  sort_unique(g.edges);
  return g;
}

WindowGraph union_graph(const WindowGraph& a, const WindowGraph& b, Stage stage) {
  if (a.vertex_count != b.vertex_count) throw InputError("union of graphs on different vertex sets");
  WindowGraph g;
  g.stage = stage;
  g.vertex_count = a.vertex_count;
  for (const auto& [u, v] : a.edges) g.edges.push_back(ordered(u, v));
  for (const auto& [u, v] : b.edges) g.edges.push_back(ordered(u, v));
  sort_unique(g.edges);
  return g;
}

std::size_t overlap_index(std::size_t copies, double w) {
  if (copies == 0) throw InputError("no copies to choose from");
  const auto slots = static_cast<double>(copies);
  return static_cast<std::size_t>(std::clamp(std::ceil(slots * w), 1.0, slots));
}

OverlapBreak break_overlaps(const ProcessSpace& space, std::uint64_t seed, const MarkedSet& marked) {
  const std::size_t n = space.window().size();
  if (marked.offsets.size() != n + 1) throw InputError("marked set does not match the window");
  OverlapBreak out;
  out.survivor.assign(n, -1);
  out.kept.assign(marked.size(), 0);
  const CounterRng rng(seed);
  for (std::size_t y = 0; y < n; ++y) {
    const auto count = marked.copies(y);
    if (count == 0) continue;
    const auto begin = static_cast<std::size_t>(marked.offsets[y]);
    for (std::size_t i = begin + 1; i < begin + count; ++i) {
      if (marked.points[i].mark == marked.points[i - 1].mark) {
        throw InvariantViolation("mark collision at window point " + std::to_string(y) + ": seed rejected");
      }
    }
    const double w = rng.uniform(Stream::kOverlap, space.window_key(y));
    const auto v = begin + overlap_index(count, w) - 1;
    out.survivor[y] = static_cast<std::int32_t>(v);
    out.kept[v] = 1;
    ++out.kept_count;
  }
  return out;
}

Induced build_pi4_pi5(const ProcessSpace& space, std::uint64_t seed, const MarkedSet& marked, const WindowGraph& pi3,
                      const OverlapBreak& overlap) {
  const std::size_t n = marked.size();
  if (pi3.vertex_count != n || overlap.kept.size() != n) throw InputError("stages disagree on the marked set");
  const Adjacency adj(n, pi3.edges);
  const CounterRng rng(seed);
  std::vector<double> w1(n);
  for (std::size_t v = 0; v < n; ++v) {
    w1[v] = rng.uniform(Stream::kTieBreak, space.window_key(static_cast<std::size_t>(marked.points[v].point)));
  }
  auto before = [&](std::int32_t a, std::int32_t b) {
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    if (w1[ua] != w1[ub]) return w1[ua] < w1[ub];
    if (marked.points[ua].mark != marked.points[ub].mark) return marked.points[ua].mark < marked.points[ub].mark;
    return a < b;
  };

  Induced out;
  out.depth.assign(n, -1);
  out.phi.assign(n, -1);
  out.psi.assign(n, -1);
  std::vector<std::int32_t> queue;
  for (std::size_t v = 0; v < n; ++v) {
    if (overlap.kept[v]) {
      out.depth[v] = 0;
      out.phi[v] = static_cast<std::int32_t>(v);
      queue.push_back(static_cast<std::int32_t>(v));
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto v = static_cast<std::size_t>(queue[head]);
    for (auto i = adj.offsets[v]; i < adj.offsets[v + 1]; ++i) {
      const auto u = static_cast<std::size_t>(adj.targets[i]);
      if (out.depth[u] < 0) {
        out.depth[u] = out.depth[v] + 1;
        queue.push_back(static_cast<std::int32_t>(u));
      }
    }
  }
  // BFS order is by depth, so every predecessor is settled first.
  for (auto vq : queue) {
    const auto v = static_cast<std::size_t>(vq);
    if (out.depth[v] == 0) continue;
    for (auto i = adj.offsets[v]; i < adj.offsets[v + 1]; ++i) {
      const auto u = static_cast<std::size_t>(adj.targets[i]);
      if (out.depth[u] != out.depth[v] - 1) continue;
      if (out.phi[v] < 0 || before(out.phi[u], out.phi[v])) out.phi[v] = out.phi[u];
    }
    for (auto i = adj.offsets[v]; i < adj.offsets[v + 1]; ++i) {
      const auto u = adj.targets[i];
      const auto uu = static_cast<std::size_t>(u);
      if (out.depth[uu] != out.depth[v] - 1 || out.phi[uu] != out.phi[v]) continue;
      if (out.psi[v] < 0 || before(u, out.psi[v])) out.psi[v] = u;
    }
  }

  Dsu dsu(n);
  for (const auto& [a, b] : pi3.edges) dsu.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  out.component.assign(n, -1);
  std::vector<std::int32_t> id(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    const auto r = dsu.find(v);
    if (id[r] < 0) {
      id[r] = static_cast<std::int32_t>(out.components++);
      out.largest_component = std::max(out.largest_component, dsu.size(r));
    }
    out.component[v] = id[r];
  }
  out.flagged.assign(out.components, 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (overlap.kept[v]) out.flagged[static_cast<std::size_t>(out.component[v])] = 0;
  }
  for (auto f : out.flagged) out.flagged_components += static_cast<std::size_t>(f);
  for (std::size_t v = 0; v < n; ++v) {
    const bool flagged = out.flagged[static_cast<std::size_t>(out.component[v])] != 0;
    if (flagged != (out.depth[v] < 0)) throw InvariantViolation("phi is undefined outside flagged components");
    out.flagged_points += static_cast<std::size_t>(flagged);
  }

  out.forest.stage = Stage::kForest;
  out.forest.directed = true;
  out.forest.vertex_count = n;
  for (std::size_t v = 0; v < n; ++v) {
    if (out.depth[v] > 0) out.forest.edges.emplace_back(static_cast<std::int32_t>(v), out.psi[v]);
  }

  out.pi4.stage = Stage::kPi4;
  out.pi4.vertex_count = n;
  for (const auto& [a, b] : pi3.edges) {
    const auto pa = out.phi[static_cast<std::size_t>(a)];
    const auto pb = out.phi[static_cast<std::size_t>(b)];
    if (pa >= 0 && pb >= 0 && pa != pb) out.pi4.edges.push_back(ordered(pa, pb));
  }
  sort_unique(out.pi4.edges);

  const std::size_t w = space.window().size();
  out.pi5.stage = Stage::kPi5;
  out.pi5.vertex_count = w;
  for (const auto& [a, b] : out.pi4.edges) {
    out.pi5.edges.push_back(
        ordered(marked.points[static_cast<std::size_t>(a)].point, marked.points[static_cast<std::size_t>(b)].point));
  }
  sort_unique(out.pi5.edges);
  if (out.pi5.edges.size() != out.pi4.edges.size()) throw InvariantViolation("S'_0 does not project bijectively to S");

  Dsu joined(w);
  for (const auto& [a, b] : out.pi5.edges) joined.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  std::vector<std::int64_t> root(out.components, -1);
  for (std::size_t v = 0; v < n; ++v) {
    if (!overlap.kept[v]) continue;
    const auto c = static_cast<std::size_t>(out.component[v]);
    const auto r = static_cast<std::int64_t>(joined.find(static_cast<std::size_t>(marked.points[v].point)));
    if (root[c] < 0) root[c] = r;
    if (root[c] != r) throw InvariantViolation("Pi5 is disconnected on a surviving Pi3 component");
  }
  return out;
}

std::vector<std::uint64_t> window_keys(const ProcessSpace& space) {
  std::vector<std::uint64_t> keys(space.window().size());
  for (std::size_t k = 0; k < keys.size(); ++k) keys[k] = space.window_key(k);
  return keys;
}

GraphingRun run_graphing(const ProcessSpace& space, const DiamondProcess& process, const PercolationSample& sample,
                         double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw InputError("percolation parameter must lie in [0, 1]");
  GraphingRun run;
  run.seed = process.seed;
  run.eps = eps;
  run.marked = marked_points(process, space.window().size());
  run.pi1 = build_pi1(space, process, run.marked);
  run.pi2 = lift_percolation(run.marked, open_at(sample, eps));
  run.pi3 = union_graph(run.pi1.graph, run.pi2, Stage::kPi3);
  run.overlap = break_overlaps(space, process.seed, run.marked);
  run.induced = build_pi4_pi5(space, process.seed, run.marked, run.pi3, run.overlap);
  return run;
}

SeedCost seed_cost(const ProcessSpace& space, const GraphingRun& run, double margin) {
  if (margin < 0.0) throw InputError("margin must be >= 0");
  const auto& window = space.window();
  const auto& marked = run.marked;
  const std::size_t n = marked.size();
  const double inner_radius = window.radius() - margin;

  std::vector<std::uint32_t> in1(n, 0);
  for (const auto& [a, b] : run.pi1.graph.edges) ++in1[static_cast<std::size_t>(b)];
  const Adjacency adj3(n, run.pi3.edges);
  std::vector<std::uint32_t> f_in(n, 0);
  for (const auto& [a, b] : run.induced.forest.edges) ++f_in[static_cast<std::size_t>(b)];

  SeedCost s;
  s.seed = run.seed;
  s.eps = run.eps;
  s.marked = n;
  double out_sum = 0.0;
  double raw1 = 0.0;
  double mtp3 = 0.0;
  double raw3 = 0.0;
  double imbalance = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const bool inner = within_radius(window.rho_to_origin(static_cast<std::size_t>(marked.points[v].point)), inner_radius);
    if (!inner) {
      ++s.band;
      continue;
    }
    ++s.inner_marked;
    s.inner_kept += static_cast<std::size_t>(run.overlap.kept[v]);
    const bool has_out = run.induced.depth[v] > 0;
    s.transport_out += static_cast<std::size_t>(has_out);
    s.transport_in += f_in[v];
    if (run.pi1.status[v] != Pi1Status::kActive) continue;
    ++s.interior;
    const double d1 = 1.0 + in1[v];
    const double d3 = static_cast<double>(adj3.degree(v));
    out_sum += 1.0;
    raw1 += d1 / 2;
    mtp3 += 1.0 + (d3 - d1) / 2;
    raw3 += d3 / 2;
    imbalance += (1.0 - in1[v]) / 2;
  }
  if (s.interior == 0) throw InputError("empty interior: enlarge the window or shrink the margin");
  const auto m = static_cast<double>(s.interior);
  s.pi1_half_degree = out_sum / m;
  s.pi1_half_degree_raw = raw1 / m;
  s.pi3_half_degree = mtp3 / m;
  s.pi3_half_degree_raw = raw3 / m;
  s.boundary_deficit = imbalance / m;
  if (s.inner_kept == 0) throw InputError("lambda_hat = 0: no surviving points in the inner window");
  s.lambda_hat = static_cast<double>(s.inner_kept) / static_cast<double>(s.inner_marked);

  // Full-window chain on the non-flagged part: |E4| <= |E3| - |F|.
  const auto reached = static_cast<double>(n - run.induced.flagged_points);
  std::size_t e3 = 0;
  for (const auto& [a, b] : run.pi3.edges) e3 += static_cast<std::size_t>(run.induced.depth[static_cast<std::size_t>(a)] >= 0);
  const auto kept = static_cast<double>(run.overlap.kept_count);
  s.lambda_full = kept / reached;
  s.pi3_mean_degree = 2.0 * static_cast<double>(e3) / reached;
  s.pi5_mean_degree = 2.0 * static_cast<double>(run.induced.pi5.edges.size()) / kept;
  s.pi5_lhs = s.pi5_mean_degree;
  s.pi5_rhs = s.pi3_mean_degree / s.lambda_full - 2.0 / s.lambda_full + 2.0;
  s.pi5_holds = s.pi5_lhs <= s.pi5_rhs + 1e-9;

  s.largest_fraction = n ? static_cast<double>(run.induced.largest_component) / static_cast<double>(n) : 0.0;
  s.components = run.induced.components;
  s.flagged_components = run.induced.flagged_components;
  return s;
}

const CostRow& CostReport::row(Stage s) const {
  for (const auto& r : rows) {
    if (r.stage == s) return r;
  }
  throw InputError("cost report has no row for stage " + to_string(s));
}

nlohmann::json CostReport::to_json() const {
  nlohmann::json out;
  out["eps"] = eps;
  out["margin"] = margin;
  out["pi5_bound_every_run"] = pi5_every_run;
  out["largest_component_fraction"] = largest_fraction;
  auto& arr = out["stages"] = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"stage", to_string(r.stage)},
                   {"half_degree_mean", r.half_degree_mean},
                   {"half_degree_se", r.half_degree_se},
                   {"half_degree_raw", r.half_degree_raw},
                   {"lambda_hat", r.lambda_hat},
                   {"pi5_bound_lhs", r.pi5_bound_lhs},
                   {"pi5_bound_rhs", r.pi5_bound_rhs},
                   {"boundary_deficit", r.boundary_deficit},
                   {"seeds", r.seeds}});
  }
  return out;
}

CostReport cost_report(const std::vector<SeedCost>& seeds, double margin) {
  if (seeds.empty()) throw InputError("cost report needs at least one seed");
  CostReport report;
  report.eps = seeds.front().eps;
  report.margin = margin;
  std::vector<double> h1, h1raw, h3, h3raw, h5, lambda, lhs, rhs, deficit, largest;
  for (const auto& s : seeds) {
    h1.push_back(s.pi1_half_degree);
    h1raw.push_back(s.pi1_half_degree_raw);
    h3.push_back(s.pi3_half_degree);
    h3raw.push_back(s.pi3_half_degree_raw);
    h5.push_back(s.pi5_mean_degree / 2);
    lambda.push_back(s.lambda_hat);
    lhs.push_back(s.pi5_lhs);
    rhs.push_back(s.pi5_rhs);
    deficit.push_back(s.boundary_deficit);
    largest.push_back(s.largest_fraction);
    report.pi5_every_run = report.pi5_every_run && s.pi5_holds;
  }
  report.largest_fraction = mean_of(largest);
  auto row = [&](Stage stage, const std::vector<double>& h, const std::vector<double>& raw) {
    CostRow r;
    r.stage = stage;
    r.half_degree_mean = mean_of(h);
    r.half_degree_se = standard_error(h);
    r.half_degree_raw = mean_of(raw);
    r.lambda_hat = mean_of(lambda);
    r.pi5_bound_lhs = mean_of(lhs);
    r.pi5_bound_rhs = mean_of(rhs);
    r.boundary_deficit = mean_of(deficit);
    r.seeds = seeds.size();
    return r;
  };
  report.rows.push_back(row(Stage::kPi1, h1, h1raw));
  report.rows.push_back(row(Stage::kPi3, h3, h3raw));
  report.rows.push_back(row(Stage::kPi5, h5, h5));
  return report;
}

TouchingTrace touching_paths(const ProductHorofunction& h1, const ProductHorofunction& h2,
                             const std::vector<Element>& eta, int k, const std::vector<Element>& eta_prime,
                             int k_prime) {
  if (k < 0 || k_prime < 0) throw InputError("connection lengths must be >= 0");
  if (static_cast<int>(eta.size()) <= k || static_cast<int>(eta_prime.size()) <= k_prime) {
    throw InputError("paths are shorter than their connection parts");
  }
  const double c = h1.c();
  const Group& g = h1.first().group();
  const Group& g2 = h1.second().group();
  TouchingTrace t;
  t.k = k;
  t.k_prime = k_prime;
  t.c = c;
  t.bound = k + (k_prime + 1) / c;
  for (int j = 0;; ++j) {
    const auto i1 = static_cast<std::size_t>(j + k);
    const auto lo = static_cast<std::size_t>(std::floor(c * j + kRhoEpsilon));
    const auto hi = static_cast<std::size_t>(std::ceil(c * j + k_prime - kRhoEpsilon));
    if (i1 >= eta.size() || hi >= eta_prime.size()) break;
    ProductPoint a{eta[i1], eta_prime[lo]};
    ProductPoint b{eta[static_cast<std::size_t>(j)], eta_prime[hi]};
    double v1 = 0.0;
    double v2 = 0.0;
    try {
      v1 = h1(a);
      v2 = h2(b);
    } catch (const WindowExhausted&) {
      t.truncated = true;
      break;
    }
    const double d = g.distance(a.first, b.first) + g2.distance(a.second, b.second) / c;
    if (!t.theta1.empty()) {
      t.monotone1 = t.monotone1 && v1 <= t.theta1.back() + kRhoEpsilon;
      t.monotone2 = t.monotone2 && v2 <= t.theta2.back() + kRhoEpsilon;
    }
    t.bound_holds = t.bound_holds && within_radius(d, t.bound);
    t.xi1.push_back(std::move(a));
    t.xi2.push_back(std::move(b));
    t.distance.push_back(d);
    t.theta1.push_back(v1);
    t.theta2.push_back(v2);
  }
  return t;
}

TouchingPaths connecting_paths(const ProductHorofunction& h1, const ProductHorofunction& h2, const ProductPoint& x1,
                               const ProductPoint& x2, int steps) {
  if (steps < 0) throw InputError("steps must be >= 0");
  auto geodesic = [](const Group& g, const Element& from, const Element& to) {
    std::vector<Element> path{from};
    for (int gen : g.spell(g.multiply(g.inverse(from), to))) path.push_back(g.multiply_generator(path.back(), gen));
    return path;
  };
  TouchingPaths p;
  p.eta = geodesic(h1.first().group(), x2.first, x1.first);
  p.k = static_cast<int>(p.eta.size()) - 1;
  const auto down = descent_path(h1.first(), x1.first, steps);
  p.eta.insert(p.eta.end(), down.points.begin() + 1, down.points.end());

  p.eta_prime = geodesic(h2.second().group(), x1.second, x2.second);
  p.k_prime = static_cast<int>(p.eta_prime.size()) - 1;
  const auto down2 = descent_path(h2.second(), x2.second, steps);
  p.eta_prime.insert(p.eta_prime.end(), down2.points.begin() + 1, down2.points.end());
  p.truncated = down.reached_boundary || down2.reached_boundary;
  return p;
}

LineBaseline::LineBaseline(std::shared_ptr<const ProductWindow> window, PercolationKernel kernel, double eps_max,
                           double margin)
    : window_(window), sampler_(window, kernel, eps_max), margin_(margin) {
  const auto& ball = window_->first_ball();
  if (!ball.group().first_generator_infinite()) throw InputError("generator 0 of the first factor has finite order");
  if (margin < 1.0) throw InputError("line baseline needs a margin of at least 1");
  const std::size_t n = window_->size();
  keys_.resize(n);
  for (std::size_t k = 0; k < n; ++k) keys_[k] = window_->key(k);

  Dsu dsu(n);
  const long double p1 = sampler_.kernel().pair_probability(1.0);
  line_overlap_.assign(n, 0);
  for (std::size_t y = 0; y < n; ++y) {
    const auto nb = ball.neighbor(static_cast<std::size_t>(window_->first_index(y)), 0);
    if (nb < 0) continue;
    const auto z = window_->find(nb, window_->second_index(y));
    if (z < 0) continue;
    lines_.push_back(ordered(static_cast<std::int32_t>(y), static_cast<std::int32_t>(z)));
    dsu.unite(y, static_cast<std::size_t>(z));
    line_overlap_[y] += p1;
    line_overlap_[static_cast<std::size_t>(z)] += p1;
  }
  sort_unique(lines_);
  line_of_.assign(n, -1);
  std::vector<std::int32_t> id(n, -1);
  for (std::size_t y = 0; y < n; ++y) {
    const auto r = dsu.find(y);
    if (id[r] < 0) id[r] = static_cast<std::int32_t>(line_count_++);
    line_of_[y] = id[r];
  }
  retained_ = sampler_.retained_mass();
}

LineRun LineBaseline::run(const PercolationSample& sample, double eps) const {
  if (!(eps >= 0.0 && eps <= sampler_.eps_max())) throw InputError("eps must lie in [0, eps_max]");
  const std::size_t n = window_->size();
  std::vector<Edge> edges = lines_;
  for (const auto& e : open_at(sample, eps)) edges.push_back(e);
  sort_unique(edges);

  LineRun r;
  r.eps = eps;
  r.points = n;
  Dsu dsu(n);
  for (const auto& [a, b] : edges) dsu.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  std::size_t largest = 0;
  std::vector<std::int32_t> line_for_root(n, -1);
  for (std::size_t y = 0; y < n; ++y) {
    const auto root = dsu.find(y);
    if (root == y) {
      ++r.components;
      largest = std::max(largest, dsu.size(y));
    }
    if (line_for_root[root] < 0) line_for_root[root] = line_of_[y];
    if (line_for_root[root] != line_of_[y]) r.lines_exact = false;
  }
  r.lines_exact = r.lines_exact && r.components == line_count_;
  r.largest_fraction = n ? static_cast<double>(largest) / static_cast<double>(n) : 0.0;

  const Adjacency adj(n, edges);
  double half = 0.0;
  long double expected = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    if (!within_radius(window_->rho_to_origin(y), window_->radius() - margin_)) continue;
    ++r.interior;
    half += static_cast<double>(adj.degree(y)) / 2;
    expected += 1.0L + static_cast<long double>(eps) * (retained_[y] - line_overlap_[y]) / 2;
  }
  if (r.interior == 0) throw InputError("empty interior: enlarge the window or shrink the margin");
  r.half_degree = half / static_cast<double>(r.interior);
  r.expected_half_degree = static_cast<double>(expected / static_cast<long double>(r.interior));
  return r;
}

}  // namespace horolab
