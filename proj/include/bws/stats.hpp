#pragma once

// Correlations and the Wilcoxon signed-rank test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "bws/common.hpp"

namespace bws {

namespace detail {

inline void check_paired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
  if (x.size() < 2) throw ValidationError("correlation needs at least two observations");
}

}  // namespace detail

/// Product-moment correlation. Throws UndefinedStatistic for constant input.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  detail::check_paired(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("correlation undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  detail::check_paired(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

struct WilcoxonResult {
  double statistic = 0;  ///< min(W+, W-)
  double w_plus = 0;
  double w_minus = 0;
  std::size_t n = 0;     ///< pairs left after dropping zero differences
  double p_value = 1;    ///< two-sided
  bool exact = false;
};

/// Sample sizes up to this use exact enumeration of sign patterns.
inline constexpr std::size_t kWilcoxonExactMax = 15;

/// Two-sided Wilcoxon signed-rank test on differences a - b.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> paired) {
  std::vector<double> diffs;
  for (const auto& [a, b] : paired) {
    if (a != b) diffs.push_back(a - b);
  }
  if (diffs.empty()) throw UndefinedStatistic("Wilcoxon test undefined: all differences are zero");

  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

  // Doubled ranks keep tied (half-integer) ranks integral. Magnitudes equal
  // up to floating round-off (score differences of rationals) count as ties.
  std::vector<std::int64_t> rank2(n);
  std::vector<std::size_t> tie_sizes;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    const double base = std::abs(diffs[order[i]]);
    while (j + 1 < n && std::abs(diffs[order[j + 1]]) - base <= 1e-12 * std::max(1.0, base)) ++j;
    const auto r2 = static_cast<std::int64_t>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }

  std::int64_t wplus2 = 0, total2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    total2 += rank2[k];
    if (diffs[k] > 0) wplus2 += rank2[k];
  }

  WilcoxonResult r;
  r.n = n;
  r.w_plus = static_cast<double>(wplus2) / 2.0;
  r.w_minus = static_cast<double>(total2 - wplus2) / 2.0;
  r.statistic = std::min(r.w_plus, r.w_minus);

  if (n <= kWilcoxonExactMax) {
    // Distribution of doubled W+ over all 2^n sign patterns.
    std::vector<std::uint64_t> dist(static_cast<std::size_t>(total2) + 1, 0);
    dist[0] = 1;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::int64_t s = total2; s >= rank2[k]; --s) dist[static_cast<std::size_t>(s)] += dist[static_cast<std::size_t>(s - rank2[k])];
    }
    const std::int64_t observed = std::abs(2 * wplus2 - total2);
    std::uint64_t extreme = 0;
    for (std::int64_t s = 0; s <= total2; ++s) {
      if (std::abs(2 * s - total2) >= observed) extreme += dist[static_cast<std::size_t>(s)];
    }
    r.p_value = static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n));
    r.exact = true;
    return r;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1) / 4.0;
  double var = nn * (nn + 1) * (2 * nn + 1) / 24.0;
  for (auto t : tie_sizes) {
    const double td = static_cast<double>(t);
    var -= (td * td * td - td) / 48.0;
  }
  const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw UndefinedStatistic("mean of an empty sequence");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace bws
