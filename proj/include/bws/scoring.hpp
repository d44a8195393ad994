#pragma once

// Counting-based best-worst scores, split-half reliability, and the
// hashtag-removal impact report.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bws/annotation.hpp"
#include "bws/corpus.hpp"
#include "bws/stats.hpp"

namespace bws {

struct ItemScore {
  double raw = 0;       ///< best share minus worst share, in [-1, 1]
  double unipolar = 0;  ///< (raw + 1) / 2, in [0, 1]
  std::size_t appearances = 0;
  std::size_t best_count = 0;
  std::size_t worst_count = 0;
  bool operator==(const ItemScore&) const = default;
};

struct ScoreTable {
  std::map<std::string, ItemScore> scores;

  std::size_t size() const noexcept { return scores.size(); }
  bool contains(const std::string& id) const { return scores.count(id) > 0; }
  const ItemScore& at(const std::string& id) const {
    auto it = scores.find(id);
    if (it == scores.end()) throw ValidationError("no score for item " + id);
    return it->second;
  }
  bool operator==(const ScoreTable&) const = default;
};

inline ItemScore make_score(std::size_t appearances, std::size_t best, std::size_t worst) {
  ItemScore s;
  s.appearances = appearances;
  s.best_count = best;
  s.worst_count = worst;
  s.raw = (static_cast<double>(best) - static_cast<double>(worst)) / static_cast<double>(appearances);
  s.unipolar = (s.raw + 1.0) / 2.0;
  return s;
}

/// Scores every item that appears in at least one answered tuple.
inline ScoreTable compute_scores(const ResponseSet& rs) {
  if (!rs.design) throw ValidationError("response set has no design");
  if (rs.responses.empty()) throw ValidationError("cannot score an empty response set");
  const auto& design = *rs.design;
  std::vector<std::size_t> app(design.items.size(), 0), best(design.items.size(), 0), worst(design.items.size(), 0);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < design.items.size(); ++i) index.emplace(design.items[i], i);
  for (const auto& r : rs.responses) {
    validate_response(design, r);
    for (auto i : design.tuples[r.tuple_index]) ++app[i];
    ++best[index.at(r.best)];
    ++worst[index.at(r.worst)];
  }
  ScoreTable table;
  for (std::size_t i = 0; i < design.items.size(); ++i) {
    if (app[i] > 0) table.scores.emplace(design.items[i], make_score(app[i], best[i], worst[i]));
  }
  return table;
}

/// The ordered pairs (higher, lower) one best/worst judgment implies: the
/// best item outranks the other three, and the two middle items outrank the
/// worst. The order between the two middle items stays unknown.
inline std::vector<std::pair<std::string, std::string>> implied_pair_orders(
    const std::array<std::string, kTupleSize>& tuple, const std::string& best, const std::string& worst) {
  if (best == worst) throw ValidationError("best and worst must differ");
  if (std::find(tuple.begin(), tuple.end(), best) == tuple.end() ||
      std::find(tuple.begin(), tuple.end(), worst) == tuple.end()) {
    throw ValidationError("best/worst not in tuple");
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& id : tuple) {
    if (id != best) out.emplace_back(best, id);
  }
  for (const auto& id : tuple) {
    if (id != best && id != worst) out.emplace_back(id, worst);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ScoreTable TSV: header row, then item_id, raw, unipolar, appearances,
// best_count, worst_count.

inline std::string serialize_scores(const ScoreTable& t) {
  std::string out = "item_id\traw\tunipolar\tappearances\tbest_count\tworst_count\n";
  for (const auto& [id, s] : t.scores) {
    out += id + '\t' + format_double(s.raw) + '\t' + format_double(s.unipolar) + '\t' +
           std::to_string(s.appearances) + '\t' + std::to_string(s.best_count) + '\t' +
           std::to_string(s.worst_count) + '\n';
  }
  return out;
}

inline ScoreTable parse_scores(std::string_view text) {
  ScoreTable t;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto cols = split(lines[ln], '\t');
    if (ln == 0 && cols[0] == "item_id") continue;
    if (cols.size() != 6) throw ParseError("expected 6 tab-separated columns", ln + 1);
    const auto app = parse_int(cols[3]);
    const auto best = parse_int(cols[4]);
    const auto worst = parse_int(cols[5]);
    if (!app || !best || !worst || *app <= 0 || *best < 0 || *worst < 0 || *best + *worst > *app) {
      throw ParseError("malformed counts", ln + 1);
    }
    t.scores.emplace(std::string(cols[0]), make_score(static_cast<std::size_t>(*app), static_cast<std::size_t>(*best),
                                                      static_cast<std::size_t>(*worst)));
  }
  return t;
}

/// Copies unipolar scores onto matching dataset items as gold scores.
inline std::size_t apply_scores(Dataset& ds, const ScoreTable& t) {
  std::size_t n = 0;
  for (auto& item : ds.items) {
    auto it = t.scores.find(item.id);
    if (it == t.scores.end()) continue;
    item.gold_score = it->second.unipolar;
    ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Split-half reliability.

enum class ShrWeighting {
  /// Each tuple contributes its within-bin best/worst shares once, so a bin
  /// holding two identical judgments of a tuple weighs it like one. Consistent
  /// annotators then give identical bins.
  per_tuple,
  /// Plain counting over the judgments routed to the bin.
  per_judgment,
};

struct ShrOptions {
  std::size_t repetitions = 100;
  std::uint64_t seed = 0;
  ShrWeighting weighting = ShrWeighting::per_tuple;
  /// Resampling attempts for a repetition whose correlation is undefined.
  std::size_t max_retries = 20;
};

struct ShrResult {
  std::size_t repetitions = 0;
  double mean_pearson = 0;
  double mean_spearman = 0;
  std::vector<std::pair<double, double>> per_repetition;  ///< (pearson, spearman)
};

namespace detail {

// Unipolar scores of one bin; `bin` lists response indices per tuple.
inline std::map<std::string, double> bin_scores(const TupleDesign& design, const std::vector<Response>& responses,
                                                const std::vector<std::vector<std::size_t>>& bin,
                                                const std::map<std::string, std::size_t>& index,
                                                ShrWeighting weighting) {
  const std::size_t n = design.items.size();
  std::vector<double> app(n, 0), best(n, 0), worst(n, 0);
  for (std::size_t t = 0; t < bin.size(); ++t) {
    if (bin[t].empty()) continue;
    const double k = static_cast<double>(bin[t].size());
    const double scale = weighting == ShrWeighting::per_tuple ? k : 1.0;
    for (auto i : design.tuples[t]) {
      std::size_t b = 0, w = 0;
      for (auto ri : bin[t]) {
        b += index.at(responses[ri].best) == i;
        w += index.at(responses[ri].worst) == i;
      }
      app[i] += k / scale;
      best[i] += static_cast<double>(b) / scale;
      worst[i] += static_cast<double>(w) / scale;
    }
  }
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (app[i] > 0) out.emplace(design.items[i], ((best[i] - worst[i]) / app[i] + 1.0) / 2.0);
  }
  return out;
}

}  // namespace detail

/// Repeatedly splits each tuple's judgments into two bins (for three
/// judgments: one or two in the first bin at random), scores each bin, and
/// correlates the two score sets over items present in both.
inline ShrResult split_half_reliability(const ResponseSet& rs, const ShrOptions& opt = {}) {
  if (!rs.design) throw ValidationError("response set has no design");
  if (opt.repetitions == 0) throw ValidationError("split-half reliability needs at least one repetition");
  const auto& design = *rs.design;
  std::vector<std::vector<std::size_t>> by_tuple(design.tuples.size());
  for (std::size_t i = 0; i < rs.responses.size(); ++i) {
    validate_response(design, rs.responses[i]);
    by_tuple[rs.responses[i].tuple_index].push_back(i);
  }
  for (std::size_t t = 0; t < by_tuple.size(); ++t) {
    if (by_tuple[t].size() < 2) {
      throw ValidationError("split-half reliability needs at least two judgments per tuple; tuple " +
                            std::to_string(t) + " has " + std::to_string(by_tuple[t].size()));
    }
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < design.items.size(); ++i) index.emplace(design.items[i], i);

  ShrResult result;
  result.repetitions = opt.repetitions;
  for (std::size_t rep = 0; rep < opt.repetitions; ++rep) {
    Rng rng(splitmix64(opt.seed ^ splitmix64(rep + 1)));
    bool done = false;
    for (std::size_t attempt = 0; attempt <= opt.max_retries && !done; ++attempt) {
      std::vector<std::vector<std::size_t>> a(by_tuple.size()), b(by_tuple.size());
      for (std::size_t t = 0; t < by_tuple.size(); ++t) {
        auto judged = by_tuple[t];
        shuffle(judged, rng);
        std::size_t take = judged.size() / 2;
        if (judged.size() % 2 == 1 && uniform_index(rng, 2) == 1) ++take;
        a[t].assign(judged.begin(), judged.begin() + static_cast<std::ptrdiff_t>(take));
        b[t].assign(judged.begin() + static_cast<std::ptrdiff_t>(take), judged.end());
      }
      const auto sa = detail::bin_scores(design, rs.responses, a, index, opt.weighting);
      const auto sb = detail::bin_scores(design, rs.responses, b, index, opt.weighting);
      std::vector<double> xa, xb;
      for (const auto& [id, v] : sa) {
        auto it = sb.find(id);
        if (it == sb.end()) continue;
        xa.push_back(v);
        xb.push_back(it->second);
      }
      try {
        result.per_repetition.emplace_back(pearson(xa, xb), spearman(xa, xb));
        done = true;
      } catch (const Error&) {
        // degenerate split; draw again
      }
    }
    if (!done) {
      throw UndefinedStatistic("split-half repetition " + std::to_string(rep) + " stayed degenerate after " +
                               std::to_string(opt.max_retries) + " resamples");
    }
  }
  for (const auto& [p, s] : result.per_repetition) {
    result.mean_pearson += p;
    result.mean_spearman += s;
  }
  result.mean_pearson /= static_cast<double>(result.per_repetition.size());
  result.mean_spearman /= static_cast<double>(result.per_repetition.size());
  return result;
}

// ---------------------------------------------------------------------------
// Hashtag impact.

struct HashtagImpactReport {
  std::size_t pair_count = 0;
  std::size_t drops = 0;
  std::size_t rises = 0;
  std::size_t unchanged = 0;
  double pct_drop = 0;
  double pct_rise = 0;
  double pct_none = 0;
  double mean_hqt = 0;
  double mean_nqt = 0;
  double mean_drop_magnitude = 0;
  double mean_rise_magnitude = 0;
  /// Absent when every pair is unchanged (the test is undefined).
  std::optional<double> wilcoxon_p;
  std::optional<double> wilcoxon_statistic;
};

struct ScatterPoint {
  double hqt_score = 0;
  double nqt_score = 0;
  std::string hashtag;
};

inline HashtagImpactReport hashtag_impact(const std::vector<ItemPair>& pairs) {
  if (pairs.empty()) throw ValidationError("hashtag impact needs at least one HQT-NQT pair");
  HashtagImpactReport r;
  r.pair_count = pairs.size();
  double drop_sum = 0, rise_sum = 0;
  std::vector<std::pair<double, double>> paired;
  for (const auto& p : pairs) {
    if (!p.hqt.gold_score || !p.nqt.gold_score) {
      throw ValidationError("pair " + p.hqt.id + "/" + p.nqt.id + " lacks scores");
    }
    const double h = *p.hqt.gold_score;
    const double n = *p.nqt.gold_score;
    r.mean_hqt += h;
    r.mean_nqt += n;
    if (n < h) {
      ++r.drops;
      drop_sum += h - n;
    } else if (n > h) {
      ++r.rises;
      rise_sum += n - h;
    } else {
      ++r.unchanged;
    }
    paired.emplace_back(h, n);
  }
  const double total = static_cast<double>(pairs.size());
  r.mean_hqt /= total;
  r.mean_nqt /= total;
  r.pct_drop = 100.0 * static_cast<double>(r.drops) / total;
  r.pct_rise = 100.0 * static_cast<double>(r.rises) / total;
  r.pct_none = 100.0 * static_cast<double>(r.unchanged) / total;
  if (r.drops) r.mean_drop_magnitude = drop_sum / static_cast<double>(r.drops);
  if (r.rises) r.mean_rise_magnitude = rise_sum / static_cast<double>(r.rises);
  if (r.unchanged < pairs.size()) {
    const auto w = wilcoxon_signed_rank(paired);
    r.wilcoxon_p = w.p_value;
    r.wilcoxon_statistic = w.statistic;
  }
  return r;
}

inline std::vector<ScatterPoint> hashtag_scatter(const std::vector<ItemPair>& pairs) {
  std::vector<ScatterPoint> out;
  for (const auto& p : pairs) {
    if (!p.hqt.gold_score || !p.nqt.gold_score) continue;
    std::string tags;
    for (const auto& t : hashtag_difference(p.hqt.text, p.nqt.text)) tags += (tags.empty() ? "" : " ") + t;
    out.push_back({*p.hqt.gold_score, *p.nqt.gold_score, tags.empty() ? "NONE" : tags});
  }
  return out;
}

inline std::string format_report_text(const HashtagImpactReport& r) {
  std::string out;
  out += "HQT-NQT pairs:            " + std::to_string(r.pair_count) + "\n";
  out += "% drop / rise / none:     " + format_fixed(r.pct_drop, 1) + " / " + format_fixed(r.pct_rise, 1) + " / " +
         format_fixed(r.pct_none, 1) + "\n";
  out += "mean score HQT / NQT:     " + format_fixed(r.mean_hqt, 2) + " / " + format_fixed(r.mean_nqt, 2) + "\n";
  out += "mean drop / rise:         " + format_fixed(r.mean_drop_magnitude, 2) + " / " +
         format_fixed(r.mean_rise_magnitude, 2) + "\n";
  out += "Wilcoxon signed-rank p:   " + (r.wilcoxon_p ? format_double(*r.wilcoxon_p) : std::string("undefined")) + "\n";
  return out;
}

inline std::string format_report_kv(const HashtagImpactReport& r) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  kv("pair_count", std::to_string(r.pair_count));
  kv("drops", std::to_string(r.drops));
  kv("rises", std::to_string(r.rises));
  kv("none", std::to_string(r.unchanged));
  kv("pct_drop", format_fixed(r.pct_drop, 1));
  kv("pct_rise", format_fixed(r.pct_rise, 1));
  kv("pct_none", format_fixed(r.pct_none, 1));
  kv("mean_hqt", format_double(r.mean_hqt));
  kv("mean_nqt", format_double(r.mean_nqt));
  kv("mean_drop_magnitude", format_double(r.mean_drop_magnitude));
  kv("mean_rise_magnitude", format_double(r.mean_rise_magnitude));
  kv("wilcoxon_statistic", r.wilcoxon_statistic ? format_double(*r.wilcoxon_statistic) : "NONE");
  kv("wilcoxon_p", r.wilcoxon_p ? format_double(*r.wilcoxon_p) : "NONE");
  return out;
}

inline std::string format_scatter(const std::vector<ScatterPoint>& pts) {
  std::string out = "hqt_score\tnqt_score\thashtag\n";
  for (const auto& p : pts) out += format_double(p.hqt_score) + '\t' + format_double(p.nqt_score) + '\t' + p.hashtag + '\n';
  return out;
}

}  // namespace bws
