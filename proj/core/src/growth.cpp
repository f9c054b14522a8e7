#include "horolab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "horolab/errors.hpp"

namespace horolab {

std::uint64_t GrowthSeries::volume(int n) const {
  if (n < 0) return 0;
  if (n > horizon()) {
    throw InputError("growth horizon too short: need radius " + std::to_string(n) + ", have " +
                     std::to_string(horizon()));
  }
  return volumes[static_cast<std::size_t>(n)];
}

std::uint64_t GrowthSeries::sphere(int n) const {
  if (n < 0) return 0;
  if (n > horizon()) {
    throw InputError("growth horizon too short: need radius " + std::to_string(n) + ", have " +
                     std::to_string(horizon()));
  }
  return spheres[static_cast<std::size_t>(n)];
}

bool is_infinite(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::kFree:
    case GroupKind::kLattice:
      return true;
    case GroupKind::kCyclic:
      return false;
    case GroupKind::kDirectProduct:
      return std::any_of(spec.factors.begin(), spec.factors.end(), is_infinite);
    case GroupKind::kFreeProduct:
      return spec.factors.size() >= 2 || is_infinite(spec.factors.front());
  }
  return false;
}

bool is_nonamenable(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::kFree:
      return spec.param >= 2;
    case GroupKind::kLattice:
    case GroupKind::kCyclic:
      return false;
    case GroupKind::kDirectProduct:
      return std::any_of(spec.factors.begin(), spec.factors.end(), is_nonamenable);
    case GroupKind::kFreeProduct: {
      if (spec.factors.size() == 1) return is_nonamenable(spec.factors.front());
      const bool z2z2 = spec.factors.size() == 2 &&
                        std::all_of(spec.factors.begin(), spec.factors.end(), [](const GroupSpec& f) {
                          return f.kind == GroupKind::kCyclic && f.param == 2;
                        });
      return !z2z2;
    }
  }
  return false;
}

GrowthSeries series_from_spheres(std::vector<std::uint64_t> spheres, int generator_count) {
  GrowthSeries out;
  out.generator_count = generator_count;
  out.spheres = std::move(spheres);
  std::uint64_t v = 0;
  for (auto s : out.spheres) {
    if (v > std::numeric_limits<std::uint64_t>::max() - s) throw ResourceError("ball volume overflows 64 bits");
    v += s;
    out.volumes.push_back(v);
  }
  out.rate_estimates.push_back(1.0);
  out.eps_nonamen = 1.0;
  for (std::size_t n = 1; n < out.volumes.size(); ++n) {
    const auto vn = static_cast<long double>(out.volumes[n]);
    out.rate_estimates.push_back(static_cast<double>(std::pow(vn, 1.0L / static_cast<long double>(n))));
    out.eps_nonamen = std::min(out.eps_nonamen, static_cast<double>(out.spheres[n] / vn));
  }
  return out;
}

GrowthSeries growth_series(const Group& group, int horizon, std::size_t cap) {
  if (horizon < 1) throw InputError("growth horizon must be >= 1");
  // In a Cayley graph the neighbors of level k lie in levels k-1, k, k+1.
  std::unordered_set<Element, ElementHash> previous;
  std::unordered_set<Element, ElementHash> current{group.identity()};
  std::vector<std::uint64_t> spheres{1};
  std::size_t total = 1;
  for (int k = 1; k <= horizon; ++k) {
    std::unordered_set<Element, ElementHash> next;
    for (const auto& e : current) {
      for (int g = 0; g < group.generator_count(); ++g) {
        Element n = group.multiply_generator(e, g);
        if (previous.count(n) || current.count(n)) continue;
        next.insert(std::move(n));
      }
    }
    total += next.size();
    if (total > cap) {
      throw ResourceError("ball enumeration of " + group.spec().name() + " exceeds the cap of " +
                          std::to_string(cap) + " elements");
    }
    spheres.push_back(next.size());
    previous = std::move(current);
    current = std::move(next);
  }
  return series_from_spheres(std::move(spheres), group.generator_count());
}

namespace {

using Series = std::vector<__int128>;

void check_range(__int128 v) {
  constexpr __int128 kLimit = static_cast<__int128>(1) << 100;
  if (v > kLimit || v < -kLimit) throw ResourceError("growth series coefficient overflow");
}

Series convolve(const Series& a, const Series& b, std::size_t n) {
  Series out(n + 1, 0);
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; i + j <= n; ++j) {
      out[i + j] += a[i] * b[j];
      check_range(out[i + j]);
    }
  }
  return out;
}

// Power-series inverse; requires a[0] == 1.
Series invert(const Series& a, std::size_t n) {
  Series out(n + 1, 0);
  out[0] = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    __int128 acc = 0;
    for (std::size_t j = 1; j <= k; ++j) {
      acc += a[j] * out[k - j];
      check_range(acc);
    }
    out[k] = -acc;
  }
  return out;
}

Series sphere_series(const GroupSpec& spec, std::size_t n) {
  Series s(n + 1, 0);
  switch (spec.kind) {
    case GroupKind::kFree: {
      const __int128 k = spec.param;
      s[0] = 1;
      __int128 p = 2 * k;
      for (std::size_t i = 1; i <= n; ++i) {
        s[i] = p;
        p *= 2 * k - 1;
        check_range(p);
      }
      return s;
    }
    case GroupKind::kCyclic: {
      const auto q = static_cast<std::size_t>(spec.param);
      s[0] = 1;
      for (std::size_t i = 1; i <= n && 2 * i <= q; ++i) s[i] = 2 * i == q ? 1 : 2;
      return s;
    }
    case GroupKind::kLattice: {
      Series line(n + 1, 2);
      line[0] = 1;
      s[0] = 1;
      for (int d = 0; d < spec.param; ++d) s = convolve(s, line, n);
      return s;
    }
    case GroupKind::kDirectProduct: {
      s[0] = 1;
      for (const auto& f : spec.factors) s = convolve(s, sphere_series(f, n), n);
      return s;
    }
    case GroupKind::kFreeProduct: {
      Series inv_sum(n + 1, 0);
      for (const auto& f : spec.factors) {
        const auto fi = invert(sphere_series(f, n), n);
        for (std::size_t i = 0; i <= n; ++i) inv_sum[i] += fi[i];
      }
      inv_sum[0] -= static_cast<__int128>(spec.factors.size()) - 1;
      return invert(inv_sum, n);
    }
  }
  return s;
}

int generator_count_of(const GroupSpec& spec) { return Group(spec).generator_count(); }

}  // namespace

GrowthSeries counted_growth_series(const GroupSpec& spec, int horizon) {
  if (horizon < 1) throw InputError("growth horizon must be >= 1");
  const auto s = sphere_series(spec, static_cast<std::size_t>(horizon));
  std::vector<std::uint64_t> spheres;
  for (auto v : s) {
    if (v < 0 || v > static_cast<__int128>(std::numeric_limits<std::uint64_t>::max())) {
      throw ResourceError("sphere count out of 64-bit range");
    }
    spheres.push_back(static_cast<std::uint64_t>(v));
  }
  return series_from_spheres(std::move(spheres), generator_count_of(spec));
}

double growth_rate(const Group& group, const GrowthSeries& series) {
  if (auto exact = group.exact_growth_rate()) return *exact;
  return series.rate_at_horizon();
}

void check_growth_invariants(const GrowthSeries& series, bool infinite) {
  const int n_max = series.horizon();
  const auto& v = series.volumes;
  for (int n = 1; n <= n_max; ++n) {
    const auto un = static_cast<std::size_t>(n);
    if (infinite && v[un] <= v[un - 1]) {
      throw InvariantViolation("growth: volumes not strictly increasing at n=" + std::to_string(n));
    }
    const auto m = static_cast<unsigned __int128>(series.generator_count + 1);
    if (static_cast<unsigned __int128>(v[un]) > m * v[un - 1]) {
      throw InvariantViolation("growth: v_{n+1} <= M v_n fails at n=" + std::to_string(n - 1));
    }
    if (n >= 2 && series.rate_estimates[un] > series.rate_estimates[un - 1] * (1.0 + 1e-12)) {
      throw InvariantViolation("growth: v_n^(1/n) increases at n=" + std::to_string(n));
    }
  }
  for (int a = 0; a <= n_max; ++a) {
    for (int b = 0; a + b <= n_max; ++b) {
      const auto lhs = static_cast<unsigned __int128>(v[static_cast<std::size_t>(a + b)]);
      const auto rhs = static_cast<unsigned __int128>(v[static_cast<std::size_t>(a)]) * v[static_cast<std::size_t>(b)];
      if (lhs > rhs) {
        throw InvariantViolation("growth: submultiplicativity v_{m+n} <= v_m v_n fails at m=" + std::to_string(a) +
                                 ", n=" + std::to_string(b));
      }
    }
  }
}

}  // namespace horolab
