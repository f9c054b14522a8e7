#include "horolab/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "horolab/errors.hpp"

namespace horolab {

ProcessSpace::ProcessSpace(Group first, Group second, const GrowthSeries& first_series,
                           const GrowthSeries& second_series, SlopeSchedule schedule, double c, double window_radius,
                           int n, std::optional<ProductPoint> shift, std::size_t cap)
    : first_(std::move(first)), second_(std::move(second)), schedule_(std::move(schedule)), c_(c), n_(n) {
  if (!(c > 0.0)) throw InputError("slope c must be positive");
  if (window_radius < 0.0) throw InputError("window radius must be >= 0");
  r_ = schedule_.radius(n);
  r_prime_ = schedule_.f_at(r_);
  volume_ = diamond_volume_at(schedule_, first_series, second_series, r_);
  outer_radius_ = window_radius + r_ + r_prime_ / c;

  const int w1 = first_radius_for(window_radius);
  const int w2 = second_radius_for(window_radius, c);
  box_first_ = w1 + r_;
  box_second_ = w2 + r_prime_;
  const int radius1 = std::max(first_radius_for(outer_radius_), w1 + 2 * r_);
  const int radius2 = std::max(second_radius_for(outer_radius_, c), w2 + 2 * r_prime_);
  ball1_ = std::make_shared<const CayleyBall>(first_, radius1, cap);
  ball2_ = std::make_shared<const CayleyBall>(second_, radius2, cap);
  window_ = std::make_shared<const ProductWindow>(ball1_, ball2_, c, window_radius);

  key1_.resize(ball1_->size());
  key2_.resize(ball2_->size());
  for (std::size_t i = 0; i < ball1_->size(); ++i) {
    key1_[i] = shift ? digest(first_.multiply(shift->first, ball1_->element(i))) : ball1_->key(i);
  }
  for (std::size_t j = 0; j < ball2_->size(); ++j) {
    key2_[j] = shift ? digest(second_.multiply(shift->second, ball2_->element(j))) : ball2_->key(j);
  }

  for (std::size_t i = 0; i < ball1_->size(); ++i) {
    const double rest = outer_radius_ - ball1_->distance(i);
    if (rest < -kRhoEpsilon) break;
    const auto n2 = ball2_->volume(second_radius_for(std::max(rest, 0.0), c));
    if (outer_first_.size() + n2 > cap) {
      throw ResourceError("center window of radius " + std::to_string(outer_radius_) + " exceeds the cap of " +
                          std::to_string(cap));
    }
    for (std::size_t j = 0; j < n2; ++j) {
      outer_first_.push_back(static_cast<std::int32_t>(i));
      outer_second_.push_back(static_cast<std::int32_t>(j));
      outer_keys_.push_back(pair_key(key1_[i], key2_[j]));
    }
  }

  const CayleyBall off1(first_, r_);
  for (std::size_t i = 0; i < off1.size(); ++i) {
    offset_first_.push_back(first_.spell(off1.element(i)));
    offset_allowance_.push_back(schedule_.f_at(r_ - off1.distance(i)));
  }
  const CayleyBall off2(second_, r_prime_);
  for (std::size_t j = 0; j < off2.size(); ++j) offset_second_.push_back(second_.spell(off2.element(j)));
}

std::uint64_t ProcessSpace::window_key(std::size_t k) const {
  return pair_key(key1_[static_cast<std::size_t>(window_->first_index(k))],
                 key2_[static_cast<std::size_t>(window_->second_index(k))]);
}

std::vector<std::int32_t> ProcessSpace::members(std::size_t outer_index) const {
  std::vector<std::int32_t> out;
  const auto i1 = static_cast<std::size_t>(outer_first_[outer_index]);
  const auto i2 = static_cast<std::size_t>(outer_second_[outer_index]);
  if (ball1_->distance(i1) > box_first_ || ball2_->distance(i2) > box_second_) return out;

  const int w1 = first_radius_for(window_->radius());
  std::vector<std::int64_t> second_targets(offset_second_.size());
  for (std::size_t b = 0; b < offset_second_.size(); ++b) second_targets[b] = ball2_->walk(i2, offset_second_[b]);

  for (std::size_t a = 0; a < offset_first_.size(); ++a) {
    const auto j1 = ball1_->walk(i1, offset_first_[a]);
    if (j1 < 0 || ball1_->distance(static_cast<std::size_t>(j1)) > w1) continue;
    const int allowance = offset_allowance_[a];
    for (std::size_t b = 0; b < offset_second_.size(); ++b) {
      if (static_cast<int>(offset_second_[b].size()) > allowance) break;
      const auto k = window_->find(j1, second_targets[b]);
      if (k >= 0) out.push_back(static_cast<std::int32_t>(k));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

DiamondProcess sample_diamond_process(const ProcessSpace& space, std::uint64_t seed, std::optional<double> p_override) {
  DiamondProcess process;
  process.n = space.n();
  process.seed = seed;
  process.p = p_override ? *p_override : 1.0 / static_cast<double>(space.volume());
  if (!(process.p >= 0.0 && process.p <= 1.0)) throw InputError("center probability must lie in [0, 1]");
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < space.outer_size(); ++i) {
    const auto key = space.outer_key(i);
    if (rng.uniform(Stream::kCenters, key) > process.p || (process.p == 0.0)) continue;
    ++process.centers;
    auto members = space.members(i);
    if (members.empty()) continue;
    process.diamonds.push_back({i, key, rng.uniform(Stream::kDiamondMarks, key), std::move(members)});
  }
  return process;
}

IncidenceStats incidence_stats(const ProcessSpace& space, const DiamondProcess& process) {
  IncidenceStats stats;
  const auto n = space.window().size();
  stats.counts.assign(n, 0);
  for (const auto& d : process.diamonds) {
    for (auto k : d.members) ++stats.counts[static_cast<std::size_t>(k)];
  }
  double sum = 0.0;
  for (auto v : stats.counts) sum += v;
  stats.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (auto v : stats.counts) sq += (v - stats.mean) * (v - stats.mean);
  stats.variance = n > 1 ? sq / static_cast<double>(n - 1) : 0.0;
  // Every window point is covered by exactly v''_n centers of W+.
  stats.expected_mean = static_cast<double>(space.volume()) * process.p;
  return stats;
}

std::vector<std::uint64_t> covering_counts(const ProcessSpace& space) {
  std::vector<std::uint64_t> counts(space.window().size(), 0);
  for (std::size_t i = 0; i < space.outer_size(); ++i) {
    for (auto k : space.members(i)) ++counts[static_cast<std::size_t>(k)];
  }
  return counts;
}

CornerEventTable corner_event_probability(const Group& first, const Group& second, const SlopeSchedule& s,
                                          const GrowthSeries& first_series, const GrowthSeries& second_series,
                                          int n_first, int n_last, const std::vector<int>& Ts,
                                          const std::vector<std::uint64_t>& seeds, std::uint64_t empirical_cap) {
  CornerEventTable table;
  std::shared_ptr<const CayleyBall> b1;
  std::shared_ptr<const CayleyBall> b2;
  auto ball = [&](std::shared_ptr<const CayleyBall>& b, const Group& g, const GrowthSeries& series, int radius) {
    if (radius < 0) return true;
    if (series.volume(radius) > empirical_cap) return false;
    if (!b || b->radius() < radius) b = std::make_shared<const CayleyBall>(g, radius);
    return true;
  };

  for (int T : Ts) {
    for (int n = n_first; n <= n_last; ++n) {
      const auto corner = corner_count(s, first_series, second_series, n, T);
      CornerEventRow row;
      row.n = n;
      row.T = T;
      row.corner_count = corner.count;
      row.volume = corner.volume;
      row.exact = corner.probability;

      const int a1 = corner.r + T - 1;
      const int a2 = corner.r_prime + T - 1;
      if (T == 0) {
        row.empirical = 0.0;
        row.standard_error = 0.0;
      } else if (!seeds.empty() && corner.count <= empirical_cap && ball(b1, first, first_series, std::max(a1, T - 1)) &&
                 ball(b2, second, second_series, std::max(a2, T - 1))) {
        const double p = 1.0 / static_cast<double>(corner.volume);
        const auto near1 = b1->volume(T - 1);
        const auto near2 = b2->volume(T - 1);
        const auto far1 = b1->volume(a1);
        const auto far2 = b2->volume(a2);
        std::size_t hits = 0;
        for (auto seed : seeds) {
          const CounterRng rng(seed);
          bool hit = false;
          auto probe = [&](std::size_t i, std::size_t j) {
            if (!hit && rng.uniform(Stream::kCenters, pair_key(b1->key(i), b2->key(j))) <= p) hit = true;
          };
          for (std::size_t i = 0; i < far1 && !hit; ++i) {
            for (std::size_t j = 0; j < near2; ++j) probe(i, j);
          }
          for (std::size_t i = 0; i < near1 && !hit; ++i) {
            for (std::size_t j = near2; j < far2; ++j) probe(i, j);
          }
          if (hit) ++hits;
        }
        const double est = static_cast<double>(hits) / static_cast<double>(seeds.size());
        row.empirical = est;
        row.standard_error = std::sqrt(std::max(est * (1 - est), 1e-12) / static_cast<double>(seeds.size()));
      }
      table.rows.push_back(row);
    }
    // Longest strictly decreasing tail for this T.
    const std::size_t end = table.rows.size();
    const std::size_t begin = end - static_cast<std::size_t>(n_last - n_first + 1);
    int tail = end > begin ? 1 : 0;
    for (std::size_t i = end - 1; i > begin; --i) {
      if (table.rows[i].exact < table.rows[i - 1].exact) {
        ++tail;
      } else {
        break;
      }
    }
    table.decreasing_tail.push_back(tail);
  }
  return table;
}

HitRow hit_probability(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second, int n, int T) {
  if (T < 0) throw InputError("T must be >= 0");
  HitRow row;
  row.n = n;
  row.T = T;
  const int r = s.radius(n);
  for (int t = 0; t <= r; ++t) row.count += first.sphere(t) * second.volume(s.f_at(r - t) + T);
  row.volume = diamond_volume_at(s, first, second, r);
  row.ratio = static_cast<long double>(row.count) / row.volume;
  row.bound = std::pow(1.0L - static_cast<long double>(second.eps_nonamen), -static_cast<long double>(T));
  row.holds = row.ratio >= row.bound * (1 - 1e-15L);
  return row;
}

}  // namespace horolab
