#include "horolab/diamonds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "horolab/errors.hpp"

namespace horolab {

std::uint64_t diamond_volume_at(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second, int r) {
  if (r < 0) throw InputError("diamond radius must be >= 0");
  std::uint64_t total = 0;
  for (int t = 0; t <= r; ++t) total += first.sphere(r - t) * second.volume(s.f_at(t));
  return total;
}

std::uint64_t diamond_volume(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second, int n) {
  return diamond_volume_at(s, first, second, s.radius(n));
}

std::vector<std::int32_t> diamond_members(const SlopeSchedule& s, int r, const ProductPoint& center,
                                          const ProductWindow& window) {
  const auto& b1 = window.first_ball();
  const auto& b2 = window.second_ball();
  const auto n1 = b1.volume(first_radius_for(window.radius()));
  const auto n2 = b2.volume(second_radius_for(window.radius(), window.c()));
  std::vector<int> d1(n1);
  std::vector<int> d2(n2);
  for (std::size_t i = 0; i < n1; ++i) d1[i] = b1.group().distance(center.first, b1.element(i));
  for (std::size_t j = 0; j < n2; ++j) d2[j] = b2.group().distance(center.second, b2.element(j));
  if (r > s.horizon) s.f_at(r);

  std::vector<std::int32_t> out;
  for (std::size_t k = 0; k < window.size(); ++k) {
    const int a = d1[static_cast<std::size_t>(window.first_index(k))];
    if (a > r) continue;
    if (d2[static_cast<std::size_t>(window.second_index(k))] <= s.f[static_cast<std::size_t>(r - a)]) {
      out.push_back(static_cast<std::int32_t>(k));
    }
  }
  return out;
}

std::vector<ProductPoint> enumerate_diamond(const SlopeSchedule& s, int r, const ProductPoint& center,
                                            const Group& first, const Group& second, std::size_t cap) {
  const int top = s.f_at(r);
  const CayleyBall b1(first, r, cap);
  const CayleyBall b2(second, top, cap);
  std::vector<ProductPoint> out;
  for (std::size_t i = 0; i < b1.size(); ++i) {
    const auto n2 = b2.volume(s.f_at(r - b1.distance(i)));
    if (out.size() + n2 > cap) throw ResourceError("diamond enumeration exceeds the cap of " + std::to_string(cap));
    const auto y = first.multiply(center.first, b1.element(i));
    for (std::size_t j = 0; j < n2; ++j) out.push_back({y, second.multiply(center.second, b2.element(j))});
  }
  std::sort(out.begin(), out.end(), [&](const ProductPoint& a, const ProductPoint& b) {
    if (a.first != b.first) return first.less(a.first, b.first);
    return second.less(a.second, b.second);
  });
  return out;
}

long double miss_complement(long double p, long double k) {
  if (k <= 0) return 0;
  if (p >= 1) return 1;
  return -std::expm1(k * std::log1p(-p));
}

CornerRow corner_count(const SlopeSchedule& s, const GrowthSeries& first, const GrowthSeries& second, int n, int T) {
  if (T < 0) throw InputError("corner parameter T must be >= 0");
  CornerRow row;
  row.n = n;
  row.T = T;
  row.r = s.radius(n);
  row.r_prime = s.radius_prime(n);
  const auto both = first.volume(T - 1) * second.volume(T - 1);
  row.count = first.volume(row.r + T - 1) * second.volume(T - 1) + first.volume(T - 1) * second.volume(row.r_prime + T - 1) -
              both;
  row.bound = std::pow(static_cast<long double>(s.M), T) *
              (static_cast<long double>(first.volume(row.r)) * second.volume(T) +
               static_cast<long double>(first.volume(T)) * second.volume(row.r_prime));
  row.volume = diamond_volume_at(s, first, second, row.r);
  row.ratio = static_cast<long double>(row.count) / row.volume;
  row.probability = miss_complement(1.0L / row.volume, row.count);
  if (static_cast<long double>(row.count) > row.bound) {
    throw InvariantViolation("corner bound |A_{n,T}| <= M^T (v_r v'_T + v_T v'_r') fails at n=" + std::to_string(n) +
                             ", T=" + std::to_string(T));
  }
  return row;
}

std::vector<DominanceRow> growth_dominance(const SlopeSchedule& s, const GrowthSeries& first,
                                           const GrowthSeries& second, int n_first, int n_last) {
  const long double eps = std::min(first.eps_nonamen, second.eps_nonamen);
  const long double m2 = static_cast<long double>(s.M) * s.M;
  std::vector<DominanceRow> rows;
  for (int n = n_first; n <= n_last; ++n) {
    DominanceRow row;
    row.n = n;
    row.r = s.radius(n);
    row.r_prime = s.radius_prime(n);
    row.volume = diamond_volume_at(s, first, second, row.r);
    row.max_factor = std::max(first.volume(row.r), second.volume(row.r_prime));
    row.ratio = static_cast<long double>(row.volume) / row.max_factor;
    row.lower_bound = eps / m2 * n;
    row.holds = row.ratio >= row.lower_bound;
    rows.push_back(row);
  }
  return rows;
}

SandwichRow sandwich_check(const SlopeSchedule& s, int n, const ProductPoint& center, const ProductWindow& window,
                           const ProductHorofunction& theta) {
  SandwichRow row;
  row.n = n;
  row.r = s.radius(n);
  const auto members = diamond_members(s, row.r, center, window);
  row.members = members.size();
  if (members.empty()) {
    row.vacuous = true;
    return row;
  }

  const auto& b1 = window.first_ball();
  const auto& b2 = window.second_ball();
  std::vector<int> h1(b1.volume(first_radius_for(window.radius())));
  std::vector<int> h2(b2.volume(second_radius_for(window.radius(), window.c())));
  for (std::size_t i = 0; i < h1.size(); ++i) h1[i] = theta.first()(b1.element(i));
  for (std::size_t j = 0; j < h2.size(); ++j) h2[j] = theta.second()(b2.element(j));
  std::vector<double> value(window.size());
  for (std::size_t k = 0; k < window.size(); ++k) {
    value[k] = theta.from_values(h1[static_cast<std::size_t>(window.first_index(k))],
                                 h2[static_cast<std::size_t>(window.second_index(k))]);
  }

  row.delta = value[static_cast<std::size_t>(members.front())];
  for (auto k : members) row.delta = std::max(row.delta, value[static_cast<std::size_t>(k)]);

  std::vector<char> inside(window.size(), 0);
  for (auto k : members) inside[static_cast<std::size_t>(k)] = 1;
  const double c = theta.c();
  for (std::size_t k = 0; k < window.size(); ++k) {
    if (in_horoball(value[k], row.delta - 2.0 / c) && !inside[k]) ++row.lower_violations;
    if (inside[k] && !in_horoball(value[k], row.delta + 1.0 / c)) ++row.upper_violations;
  }
  return row;
}

SandwichReport sandwich_report(const SlopeSchedule& s, int n_first, int n_last,
                               const std::function<ProductPoint(int)>& center_of, const ProductWindow& window,
                               const ProductHorofunction& theta) {
  SandwichReport report;
  for (int n = n_first; n <= n_last; ++n) {
    report.rows.push_back(sandwich_check(s, n, center_of(n), window, theta));
    const auto& row = report.rows.back();
    if (row.vacuous) ++report.vacuous_rows;
    report.total_violations += row.lower_violations + row.upper_violations;
  }
  if (report.vacuous_rows == report.rows.size()) {
    throw InputError("window too small: no tested diamond meets the window");
  }
  // First n after the last failing row, provided a non-vacuous row follows it.
  std::size_t start = 0;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (!report.rows[i].vacuous && !report.rows[i].holds()) start = i + 1;
  }
  for (std::size_t i = start; i < report.rows.size(); ++i) {
    if (!report.rows[i].vacuous) {
      report.first_holding = report.rows[start].n;
      break;
    }
  }
  return report;
}

}  // namespace horolab
