#include "horolab/horoboundary.hpp"

#include <cstdlib>
#include <optional>
#include <string>

#include "horolab/errors.hpp"

namespace horolab {

std::string to_string(Backing b) { return b == Backing::kExactRay ? "exact_ray" : "anchor"; }

std::string to_string(BoundaryType t) {
  switch (t) {
    case BoundaryType::kInterior:
      return "interior";
    case BoundaryType::kTypeI:
      return "type_I";
    case BoundaryType::kTypeII:
      return "type_II";
  }
  return "?";
}

Word Ray::truncate(int n) const {
  Word w;
  w.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; static_cast<int>(w.size()) < n && i < prefix.size(); ++i) w.push_back(prefix[i]);
  if (static_cast<int>(w.size()) < n && period.empty()) throw InputError("ray has an empty period");
  for (std::size_t i = 0; static_cast<int>(w.size()) < n; i = (i + 1) % period.size()) w.push_back(period[i]);
  return w;
}

Horofunction Horofunction::from_ray(Group group, Ray ray, int window_radius, int probe_budget) {
  if (window_radius < 0) throw InputError("window radius must be >= 0");
  for (int g : ray.prefix) {
    if (g < 0 || g >= group.generator_count()) throw InputError("ray uses an unknown generator");
  }
  for (int g : ray.period) {
    if (g < 0 || g >= group.generator_count()) throw InputError("ray uses an unknown generator");
  }
  const int first_n = window_radius + 2;
  const int last_n = first_n + probe_budget;
  // Geodesic check: every prefix has canonical length equal to its own length.
  const Word longest = ray.truncate(last_n + 1);
  {
    Element e = group.identity();
    for (std::size_t i = 0; i < longest.size(); ++i) {
      e = group.multiply_generator(e, longest[i]);
      if (group.length(e) != static_cast<int>(i) + 1) {
        throw InputError("ray is not geodesic: prefix of length " + std::to_string(i + 1) + " has length " +
                         std::to_string(group.length(e)));
      }
    }
  }

  const CayleyBall window(group, window_radius);
  auto target_at = [&](int n) { return group.canon(std::span<const int>(longest.data(), static_cast<std::size_t>(n))); };
  Element prev_target = target_at(first_n);
  for (int n = first_n; n < last_n; ++n) {
    Element next_target = target_at(n + 1);
    bool stable = true;
    for (std::size_t i = 0; i < window.size() && stable; ++i) {
      const auto& x = window.element(i);
      stable = group.distance(x, prev_target) - n == group.distance(x, next_target) - (n + 1);
    }
    if (stable) return Horofunction(std::move(group), Backing::kExactRay, std::move(prev_target), n, window_radius);
    prev_target = std::move(next_target);
  }
  throw ApproximationError("ray horofunction did not stabilize within " + std::to_string(probe_budget) + " probes");
}

Horofunction Horofunction::from_anchor(Group group, Element anchor, int window_radius) {
  const int d = group.length(anchor);
  if (d < 2 * window_radius) {
    throw InputError("anchor at distance " + std::to_string(d) + " is closer than twice the window radius " +
                     std::to_string(window_radius));
  }
  return shifted_distance(std::move(group), std::move(anchor), window_radius);
}

Horofunction Horofunction::shifted_distance(Group group, Element anchor, int window_radius) {
  if (window_radius < 0) throw InputError("window radius must be >= 0");
  const int d = group.length(anchor);
  return Horofunction(std::move(group), Backing::kAnchor, std::move(anchor), d, window_radius);
}

int Horofunction::operator()(const Element& x) const {
  if (!in_domain(x)) {
    throw WindowExhausted("horofunction evaluated at " + group_.format(x) + " outside its window of radius " +
                          std::to_string(window_radius_));
  }
  return group_.distance(x, target_) - shift_;
}

Element descend(const Horofunction& h, const Element& x) {
  const Group& g = h.group();
  const int want = h(x) - 1;
  std::optional<Element> best;
  for (int gen = 0; gen < g.generator_count(); ++gen) {
    Element y = g.multiply_generator(x, gen);
    if (!h.in_domain(y)) {
      throw WindowExhausted("descent from " + g.format(x) + " reaches the window boundary");
    }
    if (h(y) != want) continue;
    if (!best || g.less(y, *best)) best = std::move(y);
  }
  if (!best) throw WindowExhausted("no descending neighbor of " + g.format(x) + " inside the window");
  return *best;
}

DescentPath descent_path(const Horofunction& h, const Element& x, int steps) {
  DescentPath path;
  path.points.push_back(x);
  for (int i = 0; i < steps; ++i) {
    try {
      path.points.push_back(descend(h, path.points.back()));
    } catch (const WindowExhausted&) {
      path.reached_boundary = true;
      break;
    }
  }
  return path;
}

ProductHorofunction::ProductHorofunction(Horofunction first, Horofunction second, double c)
    : first_(std::move(first)), second_(std::move(second)), c_(c) {
  if (!(c > 0.0)) throw InputError("slope c must be positive");
}

BoundaryType classify_boundary_pair(PointKind u, PointKind u_second) {
  if (u == PointKind::kBoundary && u_second == PointKind::kBoundary) return BoundaryType::kTypeII;
  if (u == PointKind::kBoundary || u_second == PointKind::kBoundary) return BoundaryType::kTypeI;
  return BoundaryType::kInterior;
}

std::vector<HorofunctionRow> dump(const Horofunction& h) {
  const CayleyBall ball(h.group(), h.window_radius());
  std::vector<HorofunctionRow> rows;
  rows.reserve(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) {
    rows.push_back({h.group().format(ball.element(i)), h(ball.element(i)), to_string(h.backing())});
  }
  return rows;
}

void check_horofunction(const Horofunction& h) {
  const CayleyBall ball(h.group(), h.window_radius());
  if (h(h.group().identity()) != 0) throw InvariantViolation("horofunction normalization: value at o is not 0");
  std::vector<int> values(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) values[i] = h(ball.element(i));
  for (std::size_t i = 0; i < ball.size(); ++i) {
    for (int gen = 0; gen < h.group().generator_count(); ++gen) {
      const auto j = ball.neighbor(i, gen);
      if (j >= 0 && std::abs(values[i] - values[static_cast<std::size_t>(j)]) > 1) {
        throw InvariantViolation("horofunction 1-Lipschitz: fails at " + h.group().format(ball.element(i)));
      }
    }
  }
}

}  // namespace horolab
