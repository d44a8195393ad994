#pragma once

// Random maximum-diversity 4-tuple designs: 2N tuples over N items, every
// item in exactly eight tuples, no pair of items sharing more than one tuple.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bws/common.hpp"

namespace bws {

inline constexpr std::size_t kTupleSize = 4;
inline constexpr std::size_t kAppearancesPerItem = 8;
/// Each item must meet 8 x 3 distinct partners.
inline constexpr std::size_t kMinDesignItems = kAppearancesPerItem * (kTupleSize - 1) + 1;

/// Indices into TupleDesign::items.
using Tuple = std::array<std::size_t, kTupleSize>;

struct TupleDesign {
  std::vector<std::string> items;
  std::vector<Tuple> tuples;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return items.size(); }
  const std::string& id(std::size_t index) const { return items.at(index); }
  std::array<std::string, kTupleSize> tuple_ids(std::size_t t) const {
    const auto& tp = tuples.at(t);
    return {items[tp[0]], items[tp[1]], items[tp[2]], items[tp[3]]};
  }
  bool operator==(const TupleDesign&) const = default;
};

class InfeasibleDesign : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DesignExhausted : public Error {
 public:
  DesignExhausted(std::uint64_t seed, std::size_t attempts)
      : Error("tuple design search exhausted after " + std::to_string(attempts) +
              " restarts (seed " + std::to_string(seed) + ")"),
        seed_(seed),
        attempts_(attempts) {}
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::uint64_t seed_;
  std::size_t attempts_;
};

struct DesignOptions {
  std::size_t restart_budget = 1000;
  /// Local-search moves per restart, as a multiple of the slot count (8N).
  std::size_t steps_per_slot = 400;
};

namespace detail {

inline std::uint64_t pair_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

// Pair multiplicities for the local search. Dense below a few thousand
// items, hashed above.
class PairCounts {
 public:
  explicit PairCounts(std::size_t n) : n_(n) {
    if (n <= 4096) dense_.assign(n * n, 0);
  }
  int get(std::size_t a, std::size_t b) const {
    if (!dense_.empty()) return dense_[index(a, b)];
    auto it = sparse_.find(pair_key(a, b));
    return it == sparse_.end() ? 0 : it->second;
  }
  void add(std::size_t a, std::size_t b, int delta) {
    if (!dense_.empty()) {
      dense_[index(a, b)] = static_cast<std::uint8_t>(dense_[index(a, b)] + delta);
      return;
    }
    auto& c = sparse_[pair_key(a, b)];
    c += delta;
    if (c == 0) sparse_.erase(pair_key(a, b));
  }

 private:
  std::size_t index(std::size_t a, std::size_t b) const {
    return a < b ? a * n_ + b : b * n_ + a;
  }
  std::size_t n_;
  std::vector<std::uint8_t> dense_;
  std::unordered_map<std::uint64_t, int> sparse_;
};

// Cost of one unordered slot pair holding items a, b with multiplicity c:
// an item paired with itself is always a conflict; distinct items conflict
// from their second co-occurrence on.
inline int pair_cost(std::size_t a, std::size_t b, int c) {
  if (a == b) return c;
  return c > 1 ? c - 1 : 0;
}

class DesignSearch {
 public:
  DesignSearch(std::size_t n, Rng& rng, std::size_t steps) : n_(n), rng_(rng), steps_(steps) {}

  // One restart: random initial fill followed by swap repair with a short
  // annealing phase. Returns true when a conflict-free design was reached.
  bool run(std::vector<Tuple>& out) {
    const std::size_t tuples = 2 * n_;
    std::vector<std::size_t> slots;
    slots.reserve(tuples * kTupleSize);
    for (std::size_t round = 0; round < kAppearancesPerItem; ++round) {
      std::vector<std::size_t> perm(n_);
      for (std::size_t i = 0; i < n_; ++i) perm[i] = i;
      shuffle(perm, rng_);
      slots.insert(slots.end(), perm.begin(), perm.end());
    }
    slots_ = std::move(slots);
    counts_ = PairCounts(n_);
    cost_ = 0;
    for (std::size_t t = 0; t < tuples; ++t) apply_tuple(t, +1);
    rebuild_conflicts();

    const std::size_t max_steps = steps_ * slots_.size();
    // Temperature only matters for tight instances (small N) where greedy
    // repair stalls in local minima.
    double temperature = n_ < 64 ? 0.6 : 0.0;
    const double cooling = n_ < 64 ? std::pow(0.02 / 0.6, 1.0 / static_cast<double>(max_steps)) : 1.0;
    std::size_t since_rebuild = 0;
    for (std::size_t step = 0; step < max_steps && cost_ > 0; ++step) {
      if (conflicted_.empty() || ++since_rebuild > 64) {
        rebuild_conflicts();
        since_rebuild = 0;
        if (conflicted_.empty()) break;
      }
      const std::size_t s1 = conflicted_[uniform_index(rng_, conflicted_.size())];
      const std::size_t s2 = uniform_index(rng_, slots_.size());
      const std::size_t t1 = s1 / kTupleSize;
      const std::size_t t2 = s2 / kTupleSize;
      if (t1 == t2 || slots_[s1] == slots_[s2]) continue;
      const long before = cost_;
      swap_slots(s1, s2);
      const long delta = cost_ - before;
      bool accept = delta <= 0;
      if (!accept && temperature > 0.0) {
        accept = uniform_real(rng_) < std::exp(-static_cast<double>(delta) / temperature);
      }
      if (!accept) swap_slots(s1, s2);
      temperature *= cooling;
    }
    if (cost_ != 0) return false;
    out.assign(tuples, Tuple{});
    for (std::size_t t = 0; t < tuples; ++t) {
      for (std::size_t k = 0; k < kTupleSize; ++k) out[t][k] = slots_[t * kTupleSize + k];
    }
    return true;
  }

 private:
  void apply_tuple(std::size_t t, int sign) {
    const std::size_t base = t * kTupleSize;
    for (std::size_t i = 0; i < kTupleSize; ++i) {
      for (std::size_t j = i + 1; j < kTupleSize; ++j) {
        const std::size_t a = slots_[base + i];
        const std::size_t b = slots_[base + j];
        const int c = counts_.get(a, b);
        const int next = c + sign;
        cost_ += pair_cost(a, b, next) - pair_cost(a, b, c);
        counts_.add(a, b, sign);
      }
    }
  }

  void swap_slots(std::size_t s1, std::size_t s2) {
    const std::size_t t1 = s1 / kTupleSize;
    const std::size_t t2 = s2 / kTupleSize;
    apply_tuple(t1, -1);
    apply_tuple(t2, -1);
    std::swap(slots_[s1], slots_[s2]);
    apply_tuple(t1, +1);
    apply_tuple(t2, +1);
  }

  void rebuild_conflicts() {
    conflicted_.clear();
    for (std::size_t t = 0; t < slots_.size() / kTupleSize; ++t) {
      const std::size_t base = t * kTupleSize;
      for (std::size_t i = 0; i < kTupleSize; ++i) {
        bool bad = false;
        for (std::size_t j = 0; j < kTupleSize && !bad; ++j) {
          if (i == j) continue;
          const std::size_t a = slots_[base + i];
          const std::size_t b = slots_[base + j];
          bad = a == b || counts_.get(a, b) > 1;
        }
        if (bad) conflicted_.push_back(base + i);
      }
    }
  }

  std::size_t n_;
  Rng& rng_;
  std::size_t steps_;
  std::vector<std::size_t> slots_;
  PairCounts counts_{0};
  std::vector<std::size_t> conflicted_;
  long cost_ = 0;
};

// At N = 25 every pair must be covered exactly once, i.e. the design is a
// Steiner system S(2,4,25). Swap repair does not find those in reasonable
// time, so they are developed from a difference family over Z5 x Z5: two base
// blocks whose 24 internal differences hit every non-zero element once. One
// family is drawn at random, developed into 50 blocks, then relabelled.
inline std::vector<Tuple> steiner_design_25(Rng& rng) {
  using Block = std::array<int, 4>;
  auto diff = [](int a, int b) { return ((a / 5 - b / 5 + 5) % 5) * 5 + (a % 5 - b % 5 + 5) % 5; };
  auto add = [](int a, int b) { return ((a / 5 + b / 5) % 5) * 5 + (a % 5 + b % 5) % 5; };
  auto mark = [&](const Block& b, std::array<int, 25>& seen) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i != j && ++seen[diff(b[i], b[j])] > 1) return false;
      }
    }
    return true;
  };
  std::vector<Block> bases;
  for (int a1 = 1; a1 < 25; ++a1)
    for (int a2 = a1 + 1; a2 < 25; ++a2)
      for (int a3 = a2 + 1; a3 < 25; ++a3) {
        std::array<int, 25> seen{};
        if (mark({0, a1, a2, a3}, seen)) bases.push_back({0, a1, a2, a3});
      }
  std::vector<std::pair<std::size_t, std::size_t>> families;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    std::array<int, 25> seen{};
    mark(bases[i], seen);
    for (std::size_t j = i + 1; j < bases.size(); ++j) {
      auto both = seen;
      if (mark(bases[j], both)) families.emplace_back(i, j);
    }
  }
  const auto [first, second] = families[uniform_index(rng, families.size())];
  std::vector<std::size_t> relabel(25);
  for (std::size_t i = 0; i < 25; ++i) relabel[i] = i;
  shuffle(relabel, rng);
  std::vector<Tuple> tuples;
  for (const auto& base : {bases[first], bases[second]}) {
    for (int shift = 0; shift < 25; ++shift) {
      Tuple t{};
      for (std::size_t k = 0; k < 4; ++k) t[k] = relabel[static_cast<std::size_t>(add(base[k], shift))];
      tuples.push_back(t);
    }
  }
  shuffle(tuples, rng);
  return tuples;
}

}  // namespace detail

/// Builds a design over `item_ids`. Deterministic in (item order, seed).
inline TupleDesign generate_design(const std::vector<std::string>& item_ids, std::uint64_t seed,
                                   const DesignOptions& options = {}) {
  const std::size_t n = item_ids.size();
  if (n < kMinDesignItems) {
    throw InfeasibleDesign("a tuple design needs at least " + std::to_string(kMinDesignItems) +
                           " items: each item must co-occur with 24 distinct others, got " +
                           std::to_string(n));
  }
  {
    std::unordered_set<std::string> seen;
    for (const auto& id : item_ids) {
      if (!seen.insert(id).second) throw ValidationError("duplicate item id in design input: " + id);
    }
  }
  Rng rng(splitmix64(seed));
  if (n == kMinDesignItems) return TupleDesign{item_ids, detail::steiner_design_25(rng), seed};
  detail::DesignSearch search(n, rng, options.steps_per_slot);
  TupleDesign design{item_ids, {}, seed};
  for (std::size_t attempt = 0; attempt < options.restart_budget; ++attempt) {
    if (search.run(design.tuples)) return design;
  }
  throw DesignExhausted(seed, options.restart_budget);
}

struct DesignReport {
  bool tuple_count_ok = false;
  bool distinct_within_tuples = false;
  bool appearances_ok = false;
  bool no_repeated_pairs = false;
  std::size_t expected_tuples = 0;
  std::size_t actual_tuples = 0;
  /// appearance count -> number of items with that count
  std::map<std::size_t, std::size_t> appearance_histogram;
  /// items whose appearance count differs from eight, with their counts
  std::vector<std::pair<std::string, std::size_t>> wrong_appearances;
  /// tuples containing the same item twice
  std::vector<std::size_t> tuples_with_repeats;
  /// unordered pairs covered by more than one tuple, with multiplicity
  std::vector<std::tuple<std::string, std::string, std::size_t>> duplicated_pairs;
  std::size_t covered_pairs = 0;

  bool ok() const {
    return tuple_count_ok && distinct_within_tuples && appearances_ok && no_repeated_pairs;
  }
};

inline DesignReport verify_design(const TupleDesign& design) {
  DesignReport r;
  const std::size_t n = design.items.size();
  r.expected_tuples = 2 * n;
  r.actual_tuples = design.tuples.size();
  r.tuple_count_ok = r.expected_tuples == r.actual_tuples;

  std::vector<std::size_t> appearances(n, 0);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairs;
  for (std::size_t t = 0; t < design.tuples.size(); ++t) {
    const auto& tp = design.tuples[t];
    bool repeated = false;
    for (std::size_t i = 0; i < kTupleSize; ++i) {
      if (tp[i] >= n) throw ValidationError("tuple " + std::to_string(t) + " references unknown item");
      ++appearances[tp[i]];
      for (std::size_t j = i + 1; j < kTupleSize; ++j) {
        if (tp[i] == tp[j]) {
          repeated = true;
          continue;
        }
        ++pairs[{std::min(tp[i], tp[j]), std::max(tp[i], tp[j])}];
      }
    }
    if (repeated) r.tuples_with_repeats.push_back(t);
  }
  r.distinct_within_tuples = r.tuples_with_repeats.empty();
  for (std::size_t i = 0; i < n; ++i) {
    ++r.appearance_histogram[appearances[i]];
    if (appearances[i] != kAppearancesPerItem) r.wrong_appearances.emplace_back(design.items[i], appearances[i]);
  }
  r.appearances_ok = r.wrong_appearances.empty();
  r.covered_pairs = pairs.size();
  for (const auto& [p, c] : pairs) {
    if (c > 1) r.duplicated_pairs.emplace_back(design.items[p.first], design.items[p.second], c);
  }
  r.no_repeated_pairs = r.duplicated_pairs.empty();
  return r;
}

// ---------------------------------------------------------------------------
// Serialization: header "#tuples<TAB>n=<N><TAB>seed=<seed>", then one tuple
// per line as four tab-separated item ids.

inline std::string serialize_design(const TupleDesign& design) {
  std::string out = "#tuples\tn=" + std::to_string(design.items.size()) +
                    "\tseed=" + std::to_string(design.seed) + "\n";
  for (std::size_t t = 0; t < design.tuples.size(); ++t) {
    const auto ids = design.tuple_ids(t);
    out += ids[0] + '\t' + ids[1] + '\t' + ids[2] + '\t' + ids[3] + '\n';
  }
  return out;
}

/// Parses the tuple file. Item order is reconstructed from first appearance.
inline TupleDesign parse_design(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("empty tuple file", 0);
  const auto header = split(lines[0], '\t');
  if (header.size() != 3 || header[0] != "#tuples" || header[1].substr(0, 2) != "n=" ||
      header[2].substr(0, 5) != "seed=") {
    throw ParseError("expected header '#tuples\\tn=<N>\\tseed=<seed>'", 1);
  }
  const auto n = parse_int(header[1].substr(2));
  const auto seed = parse_uint64(header[2].substr(5));
  if (!n || *n < 0 || !seed) throw ParseError("malformed tuple header values", 1);

  TupleDesign design;
  design.seed = *seed;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto cols = split(lines[ln], '\t');
    if (cols.size() != kTupleSize) throw ParseError("expected 4 tab-separated item ids", ln + 1);
    Tuple tp{};
    for (std::size_t k = 0; k < kTupleSize; ++k) {
      std::string id(cols[k]);
      auto [it, inserted] = index.emplace(id, design.items.size());
      if (inserted) design.items.push_back(id);
      tp[k] = it->second;
    }
    design.tuples.push_back(tp);
  }
  if (design.items.size() != static_cast<std::size_t>(*n)) {
    throw ParseError("header declares " + std::to_string(*n) + " items but tuples mention " +
                         std::to_string(design.items.size()),
                     1);
  }
  return design;
}

inline TupleDesign load_design(const std::string& path) { return parse_design(read_file(path)); }

}  // namespace bws
