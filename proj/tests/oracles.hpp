#pragma once

// Independent reference computations used as test oracles. They share no
// code with the library beyond plain data types.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

/// True when d is num/den rounded to nearest-even, checked in exact integer
/// arithmetic.
inline bool correctly_rounded(double d, long long num, long long den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (num == 0) return d == 0.0;
  if ((num < 0) != (d < 0)) return false;
  const bool neg = num < 0;
  const long long a = neg ? -num : num;
  const double x = neg ? -d : d;
  int e = 0;
  const double frac = std::frexp(x, &e);  // x = frac * 2^e, frac in [0.5, 1)
  const auto m = static_cast<__int128>(std::ldexp(frac, 53));  // x = m * 2^(e-53)
  const int k = 53 - e;                                        // x = m / 2^k
  if (k < 0 || k > 120) return false;
  // Compare m / 2^k with a / den: error term 2*|m*den - a*2^k| vs den (half ulp).
  const __int128 lhs = m * den;
  const __int128 rhs = static_cast<__int128>(a) << k;
  const __int128 diff = lhs > rhs ? lhs - rhs : rhs - lhs;
  if (2 * diff < static_cast<__int128>(den)) return true;
  if (2 * diff == static_cast<__int128>(den)) return (m & 1) == 0;
  return false;
}

/// Average ranks by counting, O(n^2).
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) less += 1;
      if (w == v[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double cov = sxy - sx * sy / n;
  return static_cast<double>(cov / std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n)));
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

struct WilcoxonBrute {
  double w_plus, w_minus;
  std::uint64_t extreme;   ///< sign patterns at least as extreme
  std::uint64_t patterns;  ///< 2^n
};

/// Enumerates all 2^n sign assignments of the nonzero |differences|.
inline WilcoxonBrute wilcoxon_brute(const std::vector<double>& diffs_in) {
  std::vector<double> d;
  for (double x : diffs_in) {
    if (x != 0) d.push_back(x);
  }
  std::vector<double> mags;
  for (double x : d) mags.push_back(std::abs(x));
  const auto r = ranks(mags);
  const std::size_t n = d.size();
  double total = 0, wp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += r[i];
    if (d[i] > 0) wp += r[i];
  }
  const double observed = std::abs(wp - total / 2);
  std::uint64_t extreme = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) s += r[i];
    }
    if (std::abs(s - total / 2) >= observed - 1e-9) ++extreme;
  }
  return {wp, total - wp, extreme, 1ULL << n};
}

struct Count {
  long long appearances = 0, best = 0, worst = 0;
};

/// Direct counting over (tuple members, best, worst) triples.
inline std::map<std::string, Count> direct_counts(
    const std::vector<std::pair<std::vector<std::string>, std::pair<std::string, std::string>>>& judgments) {
  std::map<std::string, Count> out;
  for (const auto& [members, bw] : judgments) {
    for (const auto& m : members) {
      auto& c = out[m];
      c.appearances += 1;
      if (m == bw.first) c.best += 1;
      if (m == bw.second) c.worst += 1;
    }
  }
  return out;
}

}  // namespace oracle
