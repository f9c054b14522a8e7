#include "horolab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>

#include "horolab/errors.hpp"
#include "horolab/random.hpp"

namespace horolab {

namespace {

std::vector<Annulus> enumerate_annuli(const GrowthSeries& first, const GrowthSeries& second, double c,
                                      double max_radius) {
  const int k_max = first_radius_for(max_radius);
  const int k2_max = second_radius_for(max_radius, c);
  if (k_max > first.horizon() || k2_max > second.horizon()) {
    throw InputError("growth series are too short for kernel radius " + std::to_string(max_radius));
  }
  std::map<double, std::vector<std::pair<int, int>>> by_radius;
  for (int k = 0; k <= k_max; ++k) {
    if (first.sphere(k) == 0) continue;
    for (int k2 = 0; k2 <= k2_max; ++k2) {
      if ((k == 0 && k2 == 0) || second.sphere(k2) == 0) continue;
      const double rho = k + k2 / c;
      if (!within_radius(rho, max_radius)) continue;
      auto it = by_radius.lower_bound(rho - kRhoEpsilon);
      if (it != by_radius.end() && std::fabs(it->first - rho) <= kRhoEpsilon) {
        it->second.emplace_back(k, k2);
      } else {
        by_radius[rho].emplace_back(k, k2);
      }
    }
  }
  std::vector<Annulus> out;
  for (auto& [rho, slices] : by_radius) {
    Annulus a;
    a.radius = rho;
    a.slices = std::move(slices);
    for (auto [k, k2] : a.slices) {
      const long double size = static_cast<long double>(first.sphere(k)) * static_cast<long double>(second.sphere(k2));
      a.slice_sizes.push_back(size);
      a.size += size;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::uint64_t poisson(long double rate, double u) {
  if (rate <= 0) return 0;
  long double term = std::exp(-rate);
  long double cdf = term;
  std::uint64_t k = 0;
  while (u > cdf && k < 1'000'000) {
    ++k;
    term *= rate / static_cast<long double>(k);
    cdf += term;
    if (term == 0 && cdf < u) break;
  }
  return k;
}

constexpr std::uint64_t kForcedSlot = 0xffffffffull;

}  // namespace

PercolationKernel PercolationKernel::geometric(const GrowthSeries& first, const GrowthSeries& second, double c,
                                               double max_radius) {
  if (!(c > 0.0)) throw InputError("slope c must be positive");
  PercolationKernel k;
  k.c_ = c;
  k.annuli_ = enumerate_annuli(first, second, c, max_radius);
  if (k.annuli_.empty()) throw InputError("kernel radius admits no annulus");
  long double mass = 0.5L;
  for (auto& a : k.annuli_) {
    a.pair_probability = mass / a.size;
    mass /= 2;
  }
  return k;
}

PercolationKernel PercolationKernel::synthetic(const GrowthSeries& first, const GrowthSeries& second, double c,
                                               const std::vector<long double>& pair_probabilities) {
  if (!(c > 0.0)) throw InputError("slope c must be positive");
  PercolationKernel k;
  k.c_ = c;
  const double reach = std::min<double>(first.horizon(), second.horizon() / c);
  k.annuli_ = enumerate_annuli(first, second, c, reach);
  if (k.annuli_.size() < pair_probabilities.size()) throw InputError("growth series too short for the kernel");
  k.annuli_.resize(pair_probabilities.size());
  for (std::size_t j = 0; j < pair_probabilities.size(); ++j) {
    if (!(pair_probabilities[j] >= 0)) throw InputError("pair probabilities must be >= 0");
    k.annuli_[j].pair_probability = pair_probabilities[j];
  }
  return k;
}

long double PercolationKernel::listed_mass() const {
  long double m = 0;
  for (const auto& a : annuli_) m += a.pair_probability * a.size;
  return m;
}

int PercolationKernel::annulus_of(double rho) const {
  auto it = std::lower_bound(annuli_.begin(), annuli_.end(), rho - kRhoEpsilon,
                             [](const Annulus& a, double v) { return a.radius < v; });
  if (it == annuli_.end() || std::fabs(it->radius - rho) > kRhoEpsilon) return -1;
  return static_cast<int>(it - annuli_.begin());
}

long double PercolationKernel::pair_probability(double rho) const {
  const int j = annulus_of(rho);
  return j < 0 ? 0.0L : annuli_[static_cast<std::size_t>(j)].pair_probability;
}

PercolationSampler::PercolationSampler(std::shared_ptr<const ProductWindow> window, PercolationKernel kernel,
                                       double eps_max, std::size_t cap)
    : window_(std::move(window)), kernel_(std::move(kernel)), eps_max_(eps_max) {
  if (!window_) throw InputError("percolation needs a window");
  if (!(eps_max >= 0.0 && eps_max <= 1.0)) throw InputError("percolation parameter must lie in [0, 1]");
  if (std::fabs(kernel_.c() - window_->c()) > kRhoEpsilon) throw InputError("kernel and window disagree on c");
  const auto& b1 = window_->first_ball();
  const auto& b2 = window_->second_ball();
  const double c = window_->c();
  radius1_ = first_radius_for(window_->radius());
  radius2_ = second_radius_for(window_->radius(), c);
  n1_ = b1.volume(radius1_);
  n2_ = b2.volume(radius2_);
  if (n1_ * n1_ > cap || n2_ * n2_ > cap) throw ResourceError("window too large for pair distance tables");
  annuli_ = kernel_.annuli().size();
  max_k_ = 2 * radius1_;
  max_k2_ = 2 * radius2_;

  dist1_.resize(n1_ * n1_);
  for (std::size_t i = 0; i < n1_; ++i) {
    for (std::size_t j = i; j < n1_; ++j) {
      const auto d = static_cast<std::uint16_t>(b1.group().distance(b1.element(i), b1.element(j)));
      dist1_[i * n1_ + j] = dist1_[j * n1_ + i] = d;
    }
  }
  dist2_.resize(n2_ * n2_);
  for (std::size_t i = 0; i < n2_; ++i) {
    for (std::size_t j = i; j < n2_; ++j) {
      const auto d = static_cast<std::uint16_t>(b2.group().distance(b2.element(i), b2.element(j)));
      dist2_[i * n2_ + j] = dist2_[j * n2_ + i] = d;
    }
  }
  for (int a = 0; a <= radius1_; ++a) {
    allowance_.push_back(second_radius_for(std::max(window_->radius() - a, 0.0), c));
  }

  const auto w2 = static_cast<std::size_t>(max_k2_ + 1);
  slice_annulus_.assign(static_cast<std::size_t>(max_k_ + 1) * w2, -1);
  for (int k = 0; k <= max_k_; ++k) {
    for (int k2 = 0; k2 <= max_k2_; ++k2) {
      if (k == 0 && k2 == 0) continue;
      slice_annulus_[static_cast<std::size_t>(k) * w2 + static_cast<std::size_t>(k2)] =
          kernel_.annulus_of(k + k2 / c);
    }
  }

  const auto bw = static_cast<std::size_t>(radius2_ + 1);
  hist2_.assign(n2_ * bw * w2, 0);
  for (std::size_t y2 = 0; y2 < n2_; ++y2) {
    for (std::size_t z2 = 0; z2 < n2_; ++z2) {
      const auto k2 = dist2_[y2 * n2_ + z2];
      for (auto b = static_cast<std::size_t>(b2.distance(z2)); b < bw; ++b) ++hist2_[(y2 * bw + b) * w2 + k2];
    }
  }
  // hist1[(y1, a, k)] = #{z1 : |z1| = a, d(y1, z1) = k}
  const auto aw = static_cast<std::size_t>(radius1_ + 1);
  const auto kw = static_cast<std::size_t>(max_k_ + 1);
  std::vector<std::uint32_t> hist1(n1_ * aw * kw, 0);
  for (std::size_t y1 = 0; y1 < n1_; ++y1) {
    for (std::size_t z1 = 0; z1 < n1_; ++z1) {
      ++hist1[(y1 * aw + static_cast<std::size_t>(b1.distance(z1))) * kw + dist1_[y1 * n1_ + z1]];
    }
  }

  counts_.assign(window_->size() * annuli_, 0);
  for (std::size_t y = 0; y < window_->size(); ++y) {
    const auto y1 = static_cast<std::size_t>(window_->first_index(y));
    const auto y2 = static_cast<std::size_t>(window_->second_index(y));
    for (std::size_t a = 0; a < aw; ++a) {
      const auto b = static_cast<std::size_t>(allowance_[a]);
      for (std::size_t k = 0; k < kw; ++k) {
        const auto m1 = hist1[(y1 * aw + a) * kw + k];
        if (m1 == 0) continue;
        for (std::size_t k2 = 0; k2 < w2; ++k2) {
          const int j = slice_annulus_[k * w2 + k2];
          if (j < 0) continue;
          counts_[y * annuli_ + static_cast<std::size_t>(j)] += m1 * hist2_[(y2 * bw + b) * w2 + k2];
        }
      }
    }
  }
}

std::int64_t PercolationSampler::pick_target(std::size_t y, int annulus, std::uint64_t m) const {
  const auto& b1 = window_->first_ball();
  const auto& b2 = window_->second_ball();
  const auto y1 = static_cast<std::size_t>(window_->first_index(y));
  const auto y2 = static_cast<std::size_t>(window_->second_index(y));
  const auto w2 = static_cast<std::size_t>(max_k2_ + 1);
  const auto bw = static_cast<std::size_t>(radius2_ + 1);
  for (int a = 0; a <= radius1_; ++a) {
    const auto b = static_cast<std::size_t>(allowance_[static_cast<std::size_t>(a)]);
    const auto [lo, hi] = b1.sphere(a);
    for (std::size_t z1 = lo; z1 < hi; ++z1) {
      const auto k = dist1_[y1 * n1_ + z1];
      for (std::size_t k2 = 0; k2 < w2; ++k2) {
        if (slice_annulus_[k * w2 + k2] != annulus) continue;
        const auto block = hist2_[(y2 * bw + b) * w2 + k2];
        if (m >= block) {
          m -= block;
          continue;
        }
        const auto limit = b2.volume(static_cast<int>(b));
        for (std::size_t z2 = 0; z2 < limit; ++z2) {
          if (dist2_[y2 * n2_ + z2] != k2) continue;
          if (m == 0) return window_->find(static_cast<std::int64_t>(z1), static_cast<std::int64_t>(z2));
          --m;
        }
      }
    }
  }
  return -1;
}

PercolationSample PercolationSampler::sample(std::uint64_t seed, const std::vector<std::uint64_t>& keys) const {
  if (keys.size() != window_->size()) throw InputError("one key per window point is required");
  PercolationSample out;
  std::unordered_map<std::uint64_t, double> best;
  auto add = [&](std::size_t y, std::int64_t z, double threshold) {
    if (z < 0 || static_cast<std::size_t>(z) == y) {
      throw InvariantViolation("percolation target left the window or hit its source");
    }
    const auto a = std::min<std::uint64_t>(y, static_cast<std::uint64_t>(z));
    const auto b = std::max<std::uint64_t>(y, static_cast<std::uint64_t>(z));
    auto [it, fresh] = best.emplace((a << 32) | b, threshold);
    if (!fresh) it->second = std::min(it->second, threshold);
  };

  const CounterRng rng(seed);
  const auto& annuli = kernel_.annuli();
  for (std::size_t y = 0; y < window_->size(); ++y) {
    for (std::size_t j = 0; j < annuli_; ++j) {
      const auto count = target_count(y, static_cast<int>(j));
      if (count == 0) continue;
      const long double p = annuli[j].pair_probability;
      const long double q = static_cast<long double>(eps_max_) * p;
      if (q <= 0) continue;
      const std::uint64_t base = static_cast<std::uint64_t>(j) << 32;
      if (q >= 1) {
        // Each pair is handled once, from its smaller endpoint.
        for (std::uint64_t m = 0; m < count; ++m) {
          const auto z = pick_target(y, static_cast<int>(j), m);
          if (z < 0) throw InvariantViolation("percolation target left the window");
          if (static_cast<std::size_t>(z) < y) continue;
          const auto ka = keys[y];
          const auto kb = keys[static_cast<std::size_t>(z)];
          const double v = 1.0 - rng.uniform(Stream::kPercolation, pair_key(std::min(ka, kb), std::max(ka, kb)),
                                             base | kForcedSlot);
          add(y, z, static_cast<double>(v / p));
        }
        continue;
      }
      const long double log_miss = std::log1p(-q);
      const long double rate = -log_miss / 2 * static_cast<long double>(count);
      const auto arrivals = poisson(rate, rng.uniform(Stream::kPercolation, keys[y], base));
      out.arrivals += arrivals;
      for (std::uint64_t a = 0; a < arrivals; ++a) {
        const double u = rng.uniform(Stream::kPercolation, keys[y], base | (1 + 2 * a));
        const double v = 1.0 - rng.uniform(Stream::kPercolation, keys[y], base | (2 + 2 * a));
        const auto m = std::min<std::uint64_t>(static_cast<std::uint64_t>(u * static_cast<double>(count)), count - 1);
        const long double threshold = -std::expm1(static_cast<long double>(v) * log_miss) / p;
        add(y, pick_target(y, static_cast<int>(j), m), static_cast<double>(threshold));
      }
    }
  }

  out.edges.reserve(best.size());
  for (const auto& [key, threshold] : best) {
    out.edges.push_back({static_cast<std::int32_t>(key >> 32), static_cast<std::int32_t>(key & 0xffffffffu), threshold});
  }
  std::sort(out.edges.begin(), out.edges.end(),
            [](const PercolationEdge& x, const PercolationEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  return out;
}

std::vector<long double> PercolationSampler::retained_mass() const {
  std::vector<long double> out(window_->size(), 0);
  const auto& annuli = kernel_.annuli();
  for (std::size_t y = 0; y < out.size(); ++y) {
    for (std::size_t j = 0; j < annuli_; ++j) {
      out[y] += annuli[j].pair_probability * static_cast<long double>(target_count(y, static_cast<int>(j)));
    }
  }
  return out;
}

std::vector<std::pair<std::int32_t, std::int32_t>> open_at(const PercolationSample& sample, double eps) {
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  for (const auto& e : sample.edges) {
    if (e.threshold <= eps) out.emplace_back(e.a, e.b);
  }
  return out;
}

}  // namespace horolab
