#include "horolab/slope_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "horolab/errors.hpp"

namespace horolab {

namespace {

int floor_g(long double g) { return static_cast<int>(std::floor(g + kFloorEpsilon)); }

long double segment_slope(double c, int index) {
  const long double cc = c;
  const long double n = index / 2;
  return index % 2 == 0 ? cc - cc / (n + 1) : cc + cc / (n + 1);
}

}  // namespace

int SlopeSchedule::f_at(int t) const {
  if (t < 0 || t >= static_cast<int>(f.size())) {
    throw InputError("schedule horizon too short: need f(" + std::to_string(t) + "), have up to " +
                     std::to_string(static_cast<int>(f.size()) - 1));
  }
  return f[static_cast<std::size_t>(t)];
}

int SlopeSchedule::radius(int n) const {
  if (n < 0 || n >= breakpoints()) {
    throw InputError("schedule has " + std::to_string(breakpoints()) + " breakpoints, need index " + std::to_string(n));
  }
  return r[static_cast<std::size_t>(n)];
}

int SlopeSchedule::radius_prime(int n) const {
  radius(n);
  return r_prime[static_cast<std::size_t>(n)];
}

SlopeSchedule build_schedule(const GrowthSeries& first, const GrowthSeries& second, double c, int horizon,
                             int segment_cap) {
  if (!(c > 0.0)) throw InputError("slope c must be positive");
  if (horizon < 1) throw InputError("schedule horizon must be >= 1");
  if (segment_cap < 1) throw InputError("segment cap must be >= 1");
  if (!(first.eps_nonamen > 0.0) || !(second.eps_nonamen > 0.0)) {
    throw InputError("schedule construction needs both groups nonamenable (eps_nonamen > 0)");
  }
  if (first.horizon() < horizon) {
    throw InputError("growth horizon too short: schedule horizon " + std::to_string(horizon) + ", first factor has " +
                     std::to_string(first.horizon()));
  }

  SlopeSchedule s;
  s.c = c;
  s.M = std::max(first.generator_count, second.generator_count) + 1;
  s.f = {0};
  s.g = {0.0L};
  s.segment_of = {0};
  s.r = {0};
  s.r_prime = {0};
  s.ratios = {1.0L};

  int x = 0;
  bool out_of_data = false;
  for (int seg = 0; x < horizon && !out_of_data; ++seg) {
    ScheduleSegment segment;
    segment.index = seg;
    segment.down = seg % 2 == 0;
    segment.slope = segment_slope(c, seg);
    segment.start = x;
    const long double g0 = s.g.back();
    while (x < horizon) {
      const long double gx = g0 + static_cast<long double>(x + 1 - segment.start) * segment.slope;
      const int fx = floor_g(gx);
      if (fx > second.horizon()) {
        out_of_data = true;
        break;
      }
      ++x;
      s.g.push_back(gx);
      s.f.push_back(fx);
      s.segment_of.push_back(seg);
      segment.end = x;
      const auto vp = second.volume(fx);
      const auto v = first.volume(x);
      if (segment.down ? vp <= v : vp >= v) {
        segment.completed = true;
        s.r.push_back(x);
        s.r_prime.push_back(fx);
        s.ratios.push_back(static_cast<long double>(vp) / static_cast<long double>(v));
        break;
      }
      if (x - segment.start >= segment_cap) {
        throw DivergenceError("schedule segment " + std::to_string(seg) + " (slope " +
                              std::to_string(static_cast<double>(segment.slope)) + ", from r=" +
                              std::to_string(segment.start) + ") did not cross within " +
                              std::to_string(segment_cap) + " radii");
      }
    }
    if (x > segment.start) s.segments.push_back(segment);
    if (!segment.completed) s.truncated = true;
  }
  s.horizon = x;
  return s;
}

SlopeSchedule linear_schedule(double c, int horizon, int M) {
  if (!(c > 0.0)) throw InputError("slope c must be positive");
  if (horizon < 0) throw InputError("schedule horizon must be >= 0");
  if (M < 1) throw InputError("growth constant M must be >= 1");
  SlopeSchedule s;
  s.c = c;
  s.linear = true;
  s.M = M;
  s.horizon = horizon;
  ScheduleSegment segment;
  segment.slope = c;
  segment.end = horizon;
  segment.completed = true;
  s.segments.push_back(segment);
  for (int x = 0; x <= horizon; ++x) {
    const long double g = static_cast<long double>(c) * x;
    s.g.push_back(g);
    s.f.push_back(floor_g(g));
    s.segment_of.push_back(0);
    s.r.push_back(x);
    s.r_prime.push_back(floor_g(g));
  }
  return s;
}

void check_schedule(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second) {
  auto fail = [](const std::string& what) { throw InvariantViolation("schedule: " + what); };
  if (s.f.empty() || s.f[0] != 0) fail("f(0) = 0");
  for (std::size_t x = 0; x < s.f.size(); ++x) {
    if (s.f[x] != floor_g(s.g[x])) fail("f = floor(g) at x=" + std::to_string(x));
    if (x > 0 && s.f[x] < s.f[x - 1]) fail("f nondecreasing at x=" + std::to_string(x));
  }
  for (std::size_t j = 1; j < s.r.size(); ++j) {
    if (s.r[j] <= s.r[j - 1]) fail("breakpoints increasing at j=" + std::to_string(j));
    if (s.r_prime[j] != s.f[static_cast<std::size_t>(s.r[j])]) fail("r'_j = f(r_j) at j=" + std::to_string(j));
  }
  if (s.linear) return;

  const long double lo = 1.0L / s.M;
  const long double hi = std::pow(static_cast<long double>(s.M), 2.0L * s.c);
  for (std::size_t j = 0; j < s.r.size(); ++j) {
    const auto v = first.volume(s.r[j]);
    const auto vp = second.volume(s.r_prime[j]);
    if (j % 2 == 1 && vp > v) fail("v'/v <= 1 at odd breakpoint j=" + std::to_string(j));
    if (j % 2 == 0 && vp < v) fail("v'/v >= 1 at even breakpoint j=" + std::to_string(j));
    const long double ratio = static_cast<long double>(vp) / static_cast<long double>(v);
    if (ratio < lo * (1 - 1e-12L) || ratio > hi * (1 + 1e-12L)) {
      fail("ratio v'/v in [1/M, M^{2c}] at j=" + std::to_string(j));
    }
  }
  for (const auto& seg : s.segments) {
    if (std::fabs(seg.slope - segment_slope(s.c, seg.index)) > 1e-15L) {
      fail("segment slope sequence at segment " + std::to_string(seg.index));
    }
  }
}

std::vector<AlmostLinearRow> verify_almost_linear(const SlopeSchedule& s, int m_max) {
  std::vector<AlmostLinearRow> rows;
  const int h = static_cast<int>(s.f.size()) - 1;
  for (int m = 0; m <= m_max && m <= h; ++m) {
    AlmostLinearRow row;
    row.m = m;
    std::vector<double> dev;
    for (int n = 0; n + m <= h; ++n) {
      dev.push_back(std::fabs(s.f[static_cast<std::size_t>(n + m)] - s.f[static_cast<std::size_t>(n)] - s.c * m));
    }
    row.max_deviation = *std::max_element(dev.begin(), dev.end());
    int last_bad = -1;
    for (int n = 0; n < static_cast<int>(dev.size()); ++n) {
      if (dev[static_cast<std::size_t>(n)] > 1.0 + 1e-9) last_bad = n;
    }
    if (last_bad + 1 < static_cast<int>(dev.size())) {
      row.N = last_bad + 1;
      row.tail_deviation = *std::max_element(dev.begin() + last_bad + 1, dev.end());
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace horolab
