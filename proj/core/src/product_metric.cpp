#include "horolab/product_metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "horolab/errors.hpp"
#include "horolab/random.hpp"

namespace horolab {

std::size_t ProductPointHash::operator()(const ProductPoint& p) const {
  return static_cast<std::size_t>(pair_key(digest(p.first), digest(p.second)));
}

ProductMetric::ProductMetric(Group first, Group second, double c)
    : first_(std::move(first)), second_(std::move(second)), c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("slope c must be a positive finite number");
}

double ProductMetric::default_slope(double rate_first, double rate_second) {
  if (!(rate_first > 1.0) || !(rate_second > 1.0)) {
    throw InputError("default slope needs exponential growth in both factors");
  }
  return std::log(rate_first) / std::log(rate_second);
}

double ProductMetric::rho(const ProductPoint& x, const ProductPoint& y) const {
  return rho_from_distances(first_.distance(x.first, y.first), second_.distance(x.second, y.second));
}

ProductPoint ProductMetric::multiply(const ProductPoint& g, const ProductPoint& x) const {
  return {first_.multiply(g.first, x.first), second_.multiply(g.second, x.second)};
}

ProductPoint ProductMetric::inverse(const ProductPoint& x) const {
  return {first_.inverse(x.first), second_.inverse(x.second)};
}

std::uint64_t ProductMetric::key(const ProductPoint& x) const { return pair_key(digest(x.first), digest(x.second)); }

int first_radius_for(double radius) { return static_cast<int>(std::floor(radius + kRhoEpsilon)); }

int second_radius_for(double radius, double c) { return static_cast<int>(std::floor(c * radius + kRhoEpsilon)); }

std::vector<ProductPoint> perfect_diamond(const ProductMetric& metric, const ProductPoint& center, double radius,
                                          std::size_t cap) {
  if (radius < 0.0) throw InputError("diamond radius must be >= 0");
  const CayleyBall b1(metric.first(), first_radius_for(radius), cap);
  const CayleyBall b2(metric.second(), second_radius_for(radius, metric.c()), cap);

  std::size_t count = 0;
  for (std::size_t i = 0; i < b1.size(); ++i) {
    const double rest = radius - b1.distance(i);
    if (rest < -kRhoEpsilon) break;
    count += b2.volume(second_radius_for(std::max(rest, 0.0), metric.c()));
  }
  if (count > cap) {
    throw ResourceError("diamond of radius " + std::to_string(radius) + " has " + std::to_string(count) +
                        " points, over the cap of " + std::to_string(cap));
  }

  std::vector<ProductPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < b1.size(); ++i) {
    const double rest = radius - b1.distance(i);
    if (rest < -kRhoEpsilon) break;
    const auto n2 = b2.volume(second_radius_for(std::max(rest, 0.0), metric.c()));
    const Element y = metric.first().multiply(center.first, b1.element(i));
    for (std::size_t j = 0; j < n2; ++j) {
      out.push_back({y, metric.second().multiply(center.second, b2.element(j))});
    }
  }
  std::sort(out.begin(), out.end(), [&](const ProductPoint& a, const ProductPoint& b) {
    if (a.first != b.first) return metric.first().less(a.first, b.first);
    return metric.second().less(a.second, b.second);
  });
  return out;
}

SliceVolume ball_slice_volume(const GrowthSeries& first, const GrowthSeries& second, double c, int n) {
  if (n < 0) throw InputError("radius must be >= 0");
  SliceVolume out;
  out.summands.reserve(static_cast<std::size_t>(n) + 1);
  for (int t = 0; t <= n; ++t) {
    const auto term = first.sphere(n - t) * second.volume(second_radius_for(t, c));
    out.summands.push_back(term);
    out.total += term;
  }
  return out;
}

ProductWindow::ProductWindow(std::shared_ptr<const CayleyBall> first, std::shared_ptr<const CayleyBall> second,
                             double c, double radius)
    : first_(std::move(first)), second_(std::move(second)), c_(c), radius_(radius) {
  if (!first_ || !second_) throw InputError("window needs both factor balls");
  if (radius < 0.0) throw InputError("window radius must be >= 0");
  if (first_->radius() < first_radius_for(radius) || second_->radius() < second_radius_for(radius, c)) {
    throw InputError("factor balls are too small for a window of radius " + std::to_string(radius));
  }
  for (std::size_t i = 0; i < first_->size(); ++i) {
    const double rest = radius - first_->distance(i);
    if (rest < -kRhoEpsilon) break;
    const auto n2 = second_->volume(second_radius_for(std::max(rest, 0.0), c));
    for (std::size_t j = 0; j < n2; ++j) {
      index_.emplace((static_cast<std::uint64_t>(i) << 32) | j, static_cast<std::int32_t>(first_idx_.size()));
      first_idx_.push_back(static_cast<std::int32_t>(i));
      second_idx_.push_back(static_cast<std::int32_t>(j));
    }
  }
}

double ProductWindow::rho_to_origin(std::size_t i) const {
  return first_->distance(static_cast<std::size_t>(first_idx_[i])) +
         second_->distance(static_cast<std::size_t>(second_idx_[i])) / c_;
}

ProductPoint ProductWindow::point(std::size_t i) const {
  return {first_->element(static_cast<std::size_t>(first_idx_[i])),
          second_->element(static_cast<std::size_t>(second_idx_[i]))};
}

std::uint64_t ProductWindow::key(std::size_t i) const {
  return pair_key(first_->key(static_cast<std::size_t>(first_idx_[i])),
                 second_->key(static_cast<std::size_t>(second_idx_[i])));
}

std::int64_t ProductWindow::find(std::int64_t first, std::int64_t second) const {
  if (first < 0 || second < 0) return -1;
  const auto it = index_.find((static_cast<std::uint64_t>(first) << 32) | static_cast<std::uint64_t>(second));
  return it == index_.end() ? -1 : it->second;
}

std::int64_t ProductWindow::find(const ProductPoint& p) const { return find(first_->find(p.first), second_->find(p.second)); }

}  // namespace horolab
