#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "horolab/horoboundary.hpp"
#include "horolab/percolation.hpp"
#include "horolab/point_process.hpp"

namespace horolab {

enum class Stage { kPi1, kPi2, kPi3, kForest, kPi4, kPi5 };
std::string to_string(Stage s);

using Edge = std::pair<std::int32_t, std::int32_t>;

/// (y'', m'') with y'' a window point and m'' the mark of the diamond it came from.
struct MarkedPoint {
  std::int32_t point = 0;    // window index
  std::int32_t diamond = 0;  // index into DiamondProcess::diamonds
  double mark = 0.0;
};

/// S' restricted to the window, grouped by window point with increasing marks.
struct MarkedSet {
  std::vector<MarkedPoint> points;
  std::vector<std::int32_t> offsets;  // copies of window point y: [offsets[y], offsets[y+1])

  std::size_t size() const { return points.size(); }
  std::size_t copies(std::size_t y) const { return static_cast<std::size_t>(offsets[y + 1] - offsets[y]); }
  /// Marked index of window point y in the given diamond, or -1.
  std::int32_t find(std::size_t y, std::int32_t diamond) const;
};

MarkedSet marked_points(const DiamondProcess& process, std::size_t window_size);

struct WindowGraph {
  Stage stage = Stage::kPi1;
  std::size_t vertex_count = 0;
  bool directed = false;
  std::vector<Edge> edges;  // undirected edges have first < second
};

enum class Pi1Status : std::uint8_t {
  kActive,     // one out-edge
  kCenter,     // on the center slice of its diamond: nothing to descend to
  kExhausted,  // the descent step leaves the window
};

struct Pi1Forest {
  WindowGraph graph;  // directed (v, tau v) over marked points
  std::vector<Pi1Status> status;
  std::vector<std::int32_t> target;  // -1 unless active
  std::size_t parallel_groups = 0;   // (diamond, first coordinate) classes with >= 2 active points
  std::size_t parallel_failures = 0;
};

/*!
 * Horizontal descent inside each diamond. The horofunction of a diamond is the
 * shifted distance to its center's first coordinate x; tau steps to the
 * ElementOrder-least neighbor one closer to x, keeping the second coordinate
 * and the mark.
 */
Pi1Forest build_pi1(const ProcessSpace& space, const DiamondProcess& process, const MarkedSet& marked);

/// Open window pairs lifted to every pair of marked copies.
WindowGraph lift_percolation(const MarkedSet& marked, const std::vector<Edge>& open);

/// Undirected union, deduplicated.
WindowGraph union_graph(const WindowGraph& a, const WindowGraph& b, Stage stage);

struct OverlapBreak {
  std::vector<std::int32_t> survivor;  // per window point: marked index, -1 if uncovered
  std::vector<char> kept;              // per marked point
  std::size_t kept_count = 0;
};

/// 1-based surviving index clamp(ceil(copies * w), 1, copies).
std::size_t overlap_index(std::size_t copies, double w);

/// Keeps the copy with 1-based index clamp(ceil((k+1) w), 1, k+1) among the
/// k+1 copies sorted by mark. Equal marks at one point throw InvariantViolation.
OverlapBreak break_overlaps(const ProcessSpace& space, std::uint64_t seed, const MarkedSet& marked);

struct Induced {
  std::vector<std::int32_t> depth;      // Pi3 distance to S'_0, -1 in flagged components
  std::vector<std::int32_t> phi;        // nearest S'_0 point
  std::vector<std::int32_t> psi;        // next step towards phi
  std::vector<std::int32_t> component;  // Pi3 component per marked point
  std::vector<char> flagged;            // per component: no S'_0 point
  std::size_t components = 0;
  std::size_t flagged_components = 0;
  std::size_t flagged_points = 0;
  std::size_t largest_component = 0;
  WindowGraph forest;  // directed (v, psi v)
  WindowGraph pi4;     // over marked points in S'_0
  WindowGraph pi5;     // over window points
};

/// phi, psi, F, Pi4 and Pi5; ties go to the least w''_1 value.
Induced build_pi4_pi5(const ProcessSpace& space, std::uint64_t seed, const MarkedSet& marked, const WindowGraph& pi3,
                      const OverlapBreak& overlap);

struct GraphingRun {
  std::uint64_t seed = 0;
  double eps = 0.0;
  MarkedSet marked;
  Pi1Forest pi1;
  WindowGraph pi2;
  WindowGraph pi3;
  OverlapBreak overlap;
  Induced induced;
};

/// All stages for one seed at one eps; the percolation sample must come from
/// a sampler over the same window with eps_max >= eps.
GraphingRun run_graphing(const ProcessSpace& space, const DiamondProcess& process, const PercolationSample& sample,
                         double eps);

/// Keys of the window points, as used by the percolation sampler.
std::vector<std::uint64_t> window_keys(const ProcessSpace& space);

struct SeedCost {
  std::uint64_t seed = 0;
  double eps = 0.0;
  std::size_t marked = 0;
  std::size_t interior = 0;  // active marked points in the inner window
  std::size_t inner_marked = 0;
  std::size_t inner_kept = 0;
  double pi1_half_degree = 0.0;  // out-degree average (mass transport)
  double pi1_half_degree_raw = 0.0;
  double pi3_half_degree = 0.0;
  double pi3_half_degree_raw = 0.0;
  double boundary_deficit = 0.0;  // (out - in)/2 of Pi1, averaged over the interior
  double lambda_hat = 0.0;        // inner window
  double pi3_mean_degree = 0.0;   // over all marked points outside flagged components
  double lambda_full = 0.0;
  double pi5_mean_degree = 0.0;
  double pi5_lhs = 0.0;
  double pi5_rhs = 0.0;
  bool pi5_holds = false;
  double largest_fraction = 0.0;
  std::size_t components = 0;
  std::size_t flagged_components = 0;
  std::size_t transport_out = 0;  // sum of F out-degrees over the inner window
  std::size_t transport_in = 0;
  std::size_t band = 0;           // marked points outside the inner window
};

/// Throws InputError on an empty interior or lambda_hat = 0.
SeedCost seed_cost(const ProcessSpace& space, const GraphingRun& run, double margin);

struct CostRow {
  Stage stage = Stage::kPi1;
  double half_degree_mean = 0.0;
  double half_degree_se = 0.0;
  double half_degree_raw = 0.0;
  double lambda_hat = 0.0;
  double pi5_bound_lhs = 0.0;
  double pi5_bound_rhs = 0.0;
  double boundary_deficit = 0.0;
  std::size_t seeds = 0;
};

struct CostReport {
  double eps = 0.0;
  double margin = 0.0;
  std::vector<CostRow> rows;  // Pi1, Pi3, Pi5
  bool pi5_every_run = true;
  double largest_fraction = 0.0;

  const CostRow& row(Stage s) const;
  nlohmann::json to_json() const;
};

CostReport cost_report(const std::vector<SeedCost>& seeds, double margin);

// ---------------------------------------------------------------------------
// Touching paths between two perturbed horoballs.

struct TouchingTrace {
  int k = 0;
  int k_prime = 0;
  double c = 1.0;
  double bound = 0.0;  // k + (k' + 1)/c
  std::vector<ProductPoint> xi1;
  std::vector<ProductPoint> xi2;
  std::vector<double> distance;  // rho_c(xi1_j, xi2_j)
  std::vector<double> theta1;    // theta''_1(xi1_j)
  std::vector<double> theta2;    // theta''_2(xi2_j)
  bool bound_holds = true;
  bool monotone1 = true;
  bool monotone2 = true;
  bool truncated = false;
};

/*!
 * xi1_j = (eta_{j+k}, eta'_{floor(cj)}), xi2_j = (eta_j, eta'_{ceil(cj + k')}).
 * eta runs from x_2 to x_1 in k steps and then descends for h1's first factor;
 * eta' runs from x'_1 to x'_2 in k' steps and then descends for h2's second.
 */
TouchingTrace touching_paths(const ProductHorofunction& h1, const ProductHorofunction& h2,
                             const std::vector<Element>& eta, int k, const std::vector<Element>& eta_prime,
                             int k_prime);

struct TouchingPaths {
  std::vector<Element> eta;
  int k = 0;
  std::vector<Element> eta_prime;
  int k_prime = 0;
  bool truncated = false;  // a descent hit the horofunction domain boundary early
};

/// Geodesic connections followed by `steps` descent steps.
TouchingPaths connecting_paths(const ProductHorofunction& h1, const ProductHorofunction& h2, const ProductPoint& x1,
                               const ProductPoint& x2, int steps);

// ---------------------------------------------------------------------------
// Coset lines of generator 0 plus percolation.

struct LineRun {
  std::uint64_t seed = 0;
  double eps = 0.0;
  std::size_t points = 0;
  std::size_t components = 0;
  double largest_fraction = 0.0;
  std::size_t interior = 0;
  double half_degree = 0.0;           // over the inner window
  double expected_half_degree = 0.0;  // 1 + eps (retained mass - line overlap)/2
  bool lines_exact = true;            // at eps = 0: components are the line segments
};

class LineBaseline {
 public:
  /// The first factor's generator 0 must have infinite order.
  LineBaseline(std::shared_ptr<const ProductWindow> window, PercolationKernel kernel, double eps_max,
               double margin = 1.0);

  const ProductWindow& window() const { return *window_; }
  const PercolationSampler& sampler() const { return sampler_; }
  const std::vector<Edge>& line_edges() const { return lines_; }
  std::size_t line_count() const { return line_count_; }

  PercolationSample sample(std::uint64_t seed) const { return sampler_.sample(seed, keys_); }
  LineRun run(const PercolationSample& sample, double eps) const;

 private:
  std::shared_ptr<const ProductWindow> window_;
  PercolationSampler sampler_;
  double margin_;
  std::vector<std::uint64_t> keys_;
  std::vector<Edge> lines_;
  std::vector<std::int32_t> line_of_;  // segment id per window point
  std::size_t line_count_ = 0;
  std::vector<long double> line_overlap_;  // kernel mass on the two line neighbors inside W
  std::vector<long double> retained_;
};

}  // namespace horolab
