#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "horolab/growth.hpp"
#include "horolab/product_metric.hpp"

namespace horolab {

/// A nonempty rho_c-sphere of positive radius around o''.
struct Annulus {
  double radius = 0.0;
  std::vector<std::pair<int, int>> slices;  // (k, k') with k + k'/c = radius
  std::vector<long double> slice_sizes;     // s_k s'_{k'}
  long double size = 0;                     // |A_j|
  long double pair_probability = 0;         // p(o'', z'') for z'' in A_j
};

/*!
 * Invariant symmetric kernel p(o'', z'') that depends on z'' only through
 * rho_c(o'', z''). The geometric kernel puts mass 2^{-(j+1)} on the j-th
 * annulus, so the total mass is 1; only the first annuli are listed.
 */
class PercolationKernel {
 public:
  /// Annuli with radius <= max_radius (at least one).
  static PercolationKernel geometric(const GrowthSeries& first, const GrowthSeries& second, double c,
                                     double max_radius);
  /// Per-pair probabilities given annulus by annulus (tests and baselines).
  static PercolationKernel synthetic(const GrowthSeries& first, const GrowthSeries& second, double c,
                                     const std::vector<long double>& pair_probabilities);

  double c() const { return c_; }
  const std::vector<Annulus>& annuli() const { return annuli_; }
  /// Kernel mass on the listed annuli and beyond them.
  long double listed_mass() const;
  long double mass_beyond() const { return 1.0L - listed_mass(); }
  /// p for a pair at distance rho, 0 past the listed annuli.
  long double pair_probability(double rho) const;
  int annulus_of(double rho) const;

 private:
  double c_ = 1.0;
  std::vector<Annulus> annuli_;
};

/// Open pair of window points (a < b), open for every eps >= threshold.
struct PercolationEdge {
  std::int32_t a = 0;
  std::int32_t b = 0;
  double threshold = 0.0;
};

struct PercolationSample {
  std::vector<PercolationEdge> edges;  // sorted by (a, b)
  std::uint64_t arrivals = 0;
};

/*!
 * Exact eps-percolation on window pairs by Poisson arrivals.
 *
 * Every ordered pair (y, z) gets arrivals at rate lambda = -log(1 - eps p)/2,
 * so an unordered pair is open with probability exactly eps p, independently.
 * Arrivals are drawn at eps_max and thinned, which couples all eps <= eps_max
 * monotonically.
 */
class PercolationSampler {
 public:
  PercolationSampler(std::shared_ptr<const ProductWindow> window, PercolationKernel kernel, double eps_max,
                     std::size_t cap = kDefaultEnumerationCap);

  double eps_max() const { return eps_max_; }
  const PercolationKernel& kernel() const { return kernel_; }
  const ProductWindow& window() const { return *window_; }

  /// Keys identify window points for the counter-based randomness.
  PercolationSample sample(std::uint64_t seed, const std::vector<std::uint64_t>& keys) const;

  /// sum over z in W of p(y, z), per window point y.
  std::vector<long double> retained_mass() const;

 private:
  std::size_t target_count(std::size_t y, int annulus) const {
    return counts_[y * annuli_ + static_cast<std::size_t>(annulus)];
  }
  std::int64_t pick_target(std::size_t y, int annulus, std::uint64_t m) const;

  std::shared_ptr<const ProductWindow> window_;
  PercolationKernel kernel_;
  double eps_max_;
  std::size_t annuli_ = 0;
  int radius1_ = 0;  // window factor radii
  int radius2_ = 0;
  std::size_t n1_ = 0;  // |B_R| and |B'_{R'}|
  std::size_t n2_ = 0;
  std::vector<std::uint16_t> dist1_;  // n1 x n1
  std::vector<std::uint16_t> dist2_;  // n2 x n2
  std::vector<int> allowance_;        // second radius allowed at first distance a
  std::vector<int> slice_annulus_;    // (k, k') -> annulus or -1
  int max_k_ = 0;
  int max_k2_ = 0;
  std::vector<std::uint32_t> hist2_;  // (y2, b, k') -> #{z2 : |z2| <= b, d'(y2, z2) = k'}
  std::vector<std::uint32_t> counts_; // (y, j) -> #{z in W : rho(y, z) on annulus j}
};

/// Edges open at eps (threshold <= eps).
std::vector<std::pair<std::int32_t, std::int32_t>> open_at(const PercolationSample& sample, double eps);

}  // namespace horolab
