#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "horolab/group.hpp"
#include "horolab/growth.hpp"

namespace horolab {

/// Tolerance for comparisons of rho_c values (c may be irrational).
inline constexpr double kRhoEpsilon = 1e-9;

inline bool within_radius(double value, double radius) { return value <= radius + kRhoEpsilon; }

/// x'' = (x, x') in G'' = G x G'.
struct ProductPoint {
  Element first;
  Element second;

  bool operator==(const ProductPoint&) const = default;
  auto operator<=>(const ProductPoint&) const = default;
};

struct ProductPointHash {
  std::size_t operator()(const ProductPoint& p) const;
};

/// Weighted l1 metric rho_c((x,x'),(y,y')) = d(x,y) + d'(x',y')/c.
class ProductMetric {
 public:
  ProductMetric(Group first, Group second, double c);

  /// c = log a / log a' from the growth rates of the two factors.
  static double default_slope(double rate_first, double rate_second);

  const Group& first() const { return first_; }
  const Group& second() const { return second_; }
  double c() const { return c_; }

  ProductPoint origin() const { return {first_.identity(), second_.identity()}; }
  double rho(const ProductPoint& x, const ProductPoint& y) const;
  double rho_from_distances(int d, int d_second) const { return d + d_second / c_; }
  /// Left multiplication g'' x''.
  ProductPoint multiply(const ProductPoint& g, const ProductPoint& x) const;
  ProductPoint inverse(const ProductPoint& x) const;
  std::uint64_t key(const ProductPoint& x) const;

 private:
  Group first_;
  Group second_;
  double c_;
};

/// Points at rho_c-distance <= r from the center, in ElementOrder (first,
/// then second coordinate).
std::vector<ProductPoint> perfect_diamond(const ProductMetric& metric, const ProductPoint& center, double radius,
                                          std::size_t cap = kDefaultEnumerationCap);

struct SliceVolume {
  std::uint64_t total = 0;
  // summands[t] = s_{n-t} v'_{floor(c t)}
  std::vector<std::uint64_t> summands;
};

/// |B_n(o'', rho_c)| as a sum over vertical slices.
SliceVolume ball_slice_volume(const GrowthSeries& first, const GrowthSeries& second, double c, int n);

/*!
 * Indexed rho_c-ball of radius R around o'', built over two indexed Cayley
 * balls. Points are ordered by (first index, second index), i.e. by the
 * product ElementOrder.
 */
class ProductWindow {
 public:
  ProductWindow(std::shared_ptr<const CayleyBall> first, std::shared_ptr<const CayleyBall> second, double c,
                double radius);

  double radius() const { return radius_; }
  double c() const { return c_; }
  std::size_t size() const { return first_idx_.size(); }
  const CayleyBall& first_ball() const { return *first_; }
  const CayleyBall& second_ball() const { return *second_; }
  std::shared_ptr<const CayleyBall> first_ball_ptr() const { return first_; }
  std::shared_ptr<const CayleyBall> second_ball_ptr() const { return second_; }

  std::int32_t first_index(std::size_t i) const { return first_idx_[i]; }
  std::int32_t second_index(std::size_t i) const { return second_idx_[i]; }
  double rho_to_origin(std::size_t i) const;
  ProductPoint point(std::size_t i) const;
  std::uint64_t key(std::size_t i) const;

  /// Index of the pair of factor-ball indices, or -1 when outside the window.
  std::int64_t find(std::int64_t first, std::int64_t second) const;
  std::int64_t find(const ProductPoint& p) const;

 private:
  std::shared_ptr<const CayleyBall> first_;
  std::shared_ptr<const CayleyBall> second_;
  double c_;
  double radius_;
  std::vector<std::int32_t> first_idx_;
  std::vector<std::int32_t> second_idx_;
  std::unordered_map<std::uint64_t, std::int32_t> index_;
};

/// Factor-ball radii needed for a rho_c window of radius R.
int first_radius_for(double radius);
int second_radius_for(double radius, double c);

}  // namespace horolab
