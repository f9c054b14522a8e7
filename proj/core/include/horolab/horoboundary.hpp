#pragma once

#include <memory>
#include <string>
#include <vector>

#include "horolab/group.hpp"
#include "horolab/product_metric.hpp"

namespace horolab {

enum class Backing { kExactRay, kAnchor };

std::string to_string(Backing b);

/// Eventually periodic word: prefix followed by the period repeated forever.
struct Ray {
  Word prefix;
  Word period;

  /// The first n letters.
  Word truncate(int n) const;
};

/*!
 * Horofunction d_theta restricted to the ball of radius R around o.
 *
 * Ray-backed values are limits d(., ray_N) - N, verified stable over two
 * consecutive N. Anchor-backed values are the shifted distance
 * d(., x) - d(x, o) for a fixed far point x.
 */
class Horofunction {
 public:
  static Horofunction from_ray(Group group, Ray ray, int window_radius, int probe_budget = 64);
  /// Requires d(anchor, o) >= 2 * window_radius.
  static Horofunction from_anchor(Group group, Element anchor, int window_radius);
  /// Shifted distance without the anchor-distance requirement.
  static Horofunction shifted_distance(Group group, Element anchor, int window_radius);

  Backing backing() const { return backing_; }
  const Group& group() const { return group_; }
  int window_radius() const { return window_radius_; }
  bool in_domain(const Element& x) const { return group_.length(x) <= window_radius_; }
  /// The far point: the anchor, or ray_N at the stabilized N.
  const Element& target() const { return target_; }
  int shift() const { return shift_; }

  /// Throws WindowExhausted outside the window.
  int operator()(const Element& x) const;

 private:
  Horofunction(Group group, Backing backing, Element target, int shift, int window_radius)
      : group_(std::move(group)), backing_(backing), target_(std::move(target)), shift_(shift),
        window_radius_(window_radius) {}

  Group group_;
  Backing backing_;
  Element target_;
  int shift_;
  int window_radius_;
};

/// ElementOrder-least neighbor y of x with h(y) = h(x) - 1.
Element descend(const Horofunction& h, const Element& x);

/// Repeated descent until `steps` are taken or the window boundary is hit.
struct DescentPath {
  std::vector<Element> points;
  bool reached_boundary = false;
};
DescentPath descent_path(const Horofunction& h, const Element& x, int steps);

/// theta'' = (theta, theta'): value h(y) + h'(y')/c.
class ProductHorofunction {
 public:
  ProductHorofunction(Horofunction first, Horofunction second, double c);

  double operator()(const ProductPoint& p) const { return first_(p.first) + second_(p.second) / c_; }
  double from_values(int h, int h_second) const { return h + h_second / c_; }
  const Horofunction& first() const { return first_; }
  const Horofunction& second() const { return second_; }
  double c() const { return c_; }

 private:
  Horofunction first_;
  Horofunction second_;
  double c_;
};

/// HB(theta, delta) membership: value <= delta (with the rho tolerance).
inline bool in_horoball(double value, double delay) { return within_radius(value, delay); }

enum class PointKind { kElement, kBoundary };
enum class BoundaryType { kInterior, kTypeI, kTypeII };

std::string to_string(BoundaryType t);

/// Pairs with at least one boundary component; type II iff both are.
BoundaryType classify_boundary_pair(PointKind u, PointKind u_second);

/// Rows (word, value, backing_kind) over the window, in ElementOrder.
struct HorofunctionRow {
  std::string word;
  int value;
  std::string backing;
};
std::vector<HorofunctionRow> dump(const Horofunction& h);

/// Checks 1-Lipschitz and h(o) = 0 on the whole window; throws InvariantViolation.
void check_horofunction(const Horofunction& h);

}  // namespace horolab
