#pragma once

// Tweet datasets: items, partitions, HQT/NQT pairing, and the TSV formats.
//
// Canonical format, one item per line, six tab-separated columns:
//
//   id  text  emotion  partition  kind:pair_id  score
//
// with the literal NONE for absent values, e.g. "HQT:NONE" or a score of
// "NONE". The shared-task release format (id, text, emotion, score) is read by
// parse_release().

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bws/common.hpp"

namespace bws {

enum class Emotion { anger, fear, joy, sadness };
enum class Partition { train, dev, test, unassigned };
enum class ItemKind { hqt, nqt, qt };

inline constexpr Emotion kEmotions[] = {Emotion::anger, Emotion::fear, Emotion::joy, Emotion::sadness};

inline std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::anger: return "anger";
    case Emotion::fear: return "fear";
    case Emotion::joy: return "joy";
    case Emotion::sadness: return "sadness";
  }
  return "?";
}

inline std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::dev: return "dev";
    case Partition::test: return "test";
    case Partition::unassigned: return "unassigned";
  }
  return "?";
}

inline std::string_view to_string(ItemKind k) {
  switch (k) {
    case ItemKind::hqt: return "HQT";
    case ItemKind::nqt: return "NQT";
    case ItemKind::qt: return "QT";
  }
  return "?";
}

inline std::optional<Emotion> parse_emotion(std::string_view s) {
  const auto l = to_lower_ascii(trim(s));
  for (auto e : kEmotions) {
    if (l == to_string(e)) return e;
  }
  return std::nullopt;
}

inline std::optional<Partition> parse_partition(std::string_view s) {
  const auto l = to_lower_ascii(trim(s));
  for (auto p : {Partition::train, Partition::dev, Partition::test, Partition::unassigned}) {
    if (l == to_string(p)) return p;
  }
  if (l == "none") return Partition::unassigned;
  return std::nullopt;
}

inline std::optional<ItemKind> parse_kind(std::string_view s) {
  const auto l = to_lower_ascii(trim(s));
  if (l == "hqt") return ItemKind::hqt;
  if (l == "nqt") return ItemKind::nqt;
  if (l == "qt") return ItemKind::qt;
  return std::nullopt;
}

struct Item {
  std::string id;
  std::string text;
  Emotion emotion = Emotion::anger;
  Partition partition = Partition::unassigned;
  ItemKind kind = ItemKind::qt;
  /// Links an NQT copy to its HQT original (and the original to its copy).
  std::optional<std::string> pair_id;
  std::optional<double> gold_score;

  bool operator==(const Item&) const = default;
};

struct Dataset {
  std::vector<Item> items;
  /// Shared emotion; absent only for an empty dataset.
  std::optional<Emotion> emotion;

  std::size_t size() const noexcept { return items.size(); }
  bool operator==(const Dataset&) const = default;

  const Item* find(std::string_view id) const {
    for (const auto& it : items) {
      if (it.id == id) return &it;
    }
    return nullptr;
  }

  std::vector<Item> in_partitions(std::initializer_list<Partition> parts) const {
    std::vector<Item> out;
    for (const auto& it : items) {
      if (std::find(parts.begin(), parts.end(), it.partition) != parts.end()) out.push_back(it);
    }
    return out;
  }
};

/// Checks the per-item invariants.
inline void validate_item(const Item& item) {
  if (item.id.empty()) throw ValidationError("item with empty id");
  if (trim(item.text).empty()) throw ValidationError("item " + item.id + " has empty text");
  if (item.kind == ItemKind::nqt && !item.pair_id) {
    throw ValidationError("NQT item " + item.id + " lacks a pair id");
  }
  if (item.kind == ItemKind::qt && item.pair_id) {
    throw ValidationError("QT item " + item.id + " carries a pair id");
  }
  if (item.gold_score && !(*item.gold_score >= 0.0 && *item.gold_score <= 1.0)) {
    throw ValidationError("item " + item.id + " has score " + format_double(*item.gold_score) +
                          " outside [0,1]");
  }
}

/// Checks id uniqueness, a single shared emotion, and every item.
inline void validate_dataset(Dataset& ds) {
  std::unordered_set<std::string> ids;
  for (const auto& item : ds.items) {
    validate_item(item);
    if (!ids.insert(item.id).second) throw ValidationError("duplicate item id " + item.id);
    if (!ds.emotion) ds.emotion = item.emotion;
    if (item.emotion != *ds.emotion) {
      throw ValidationError("item " + item.id + " has emotion " + std::string(to_string(item.emotion)) +
                            " in a " + std::string(to_string(*ds.emotion)) + " dataset");
    }
  }
}

enum class DatasetFormat {
  /// Canonical six columns; the score column populates gold_score.
  scored_tsv,
  /// Canonical columns; the score column, if any, is ignored.
  raw_tsv,
};

inline Dataset parse_dataset(std::string_view text, DatasetFormat format) {
  Dataset ds;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto cols = split(lines[ln], '\t');
    const bool width_ok = format == DatasetFormat::scored_tsv ? cols.size() == 6
                                                              : (cols.size() == 5 || cols.size() == 6);
    if (!width_ok) {
      throw ParseError("expected 6 tab-separated columns, found " + std::to_string(cols.size()), ln + 1);
    }
    Item item;
    item.id = std::string(trim(cols[0]));
    item.text = std::string(cols[1]);
    auto emotion = parse_emotion(cols[2]);
    if (!emotion) throw ParseError("unknown emotion '" + std::string(cols[2]) + "'", ln + 1);
    item.emotion = *emotion;
    auto partition = parse_partition(cols[3]);
    if (!partition) throw ParseError("unknown partition '" + std::string(cols[3]) + "'", ln + 1);
    item.partition = *partition;
    const auto kind_cols = split(cols[4], ':');
    auto kind = parse_kind(kind_cols[0]);
    if (!kind || kind_cols.size() > 2) throw ParseError("malformed kind:pair_id '" + std::string(cols[4]) + "'", ln + 1);
    item.kind = *kind;
    if (kind_cols.size() == 2 && trim(kind_cols[1]) != "NONE" && !trim(kind_cols[1]).empty()) {
      item.pair_id = std::string(trim(kind_cols[1]));
    }
    if (format == DatasetFormat::scored_tsv && trim(cols[5]) != "NONE") {
      auto score = parse_double(cols[5]);
      if (!score) throw ParseError("malformed score '" + std::string(cols[5]) + "'", ln + 1);
      item.gold_score = *score;
    }
    try {
      validate_item(item);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(ln + 1) + ": " + e.what());
    }
    ds.items.push_back(std::move(item));
  }
  validate_dataset(ds);
  return ds;
}

inline Dataset load_dataset(const std::string& path, DatasetFormat format) {
  return parse_dataset(read_file(path), format);
}

inline std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  for (const auto& it : ds.items) {
    if (it.text.find_first_of("\t\n\r") != std::string::npos) {
      throw ValidationError("item " + it.id + " text contains a tab or newline");
    }
    out += it.id;
    out += '\t';
    out += it.text;
    out += '\t';
    out += to_string(it.emotion);
    out += '\t';
    out += to_string(it.partition);
    out += '\t';
    out += to_string(it.kind);
    out += ':';
    out += it.pair_id ? *it.pair_id : "NONE";
    out += '\t';
    out += it.gold_score ? format_double(*it.gold_score) : "NONE";
    out += '\n';
  }
  return out;
}

inline void write_dataset(const Dataset& ds, const std::string& path) {
  write_file(path, serialize_dataset(ds));
}

/// Reads the shared-task release layout: id, text, emotion, score (score may
/// be NONE). An optional header row whose first column is "id" is skipped.
/// Every item is tagged with `partition` and kind QT.
inline Dataset parse_release(std::string_view text, Partition partition) {
  Dataset ds;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto cols = split(lines[ln], '\t');
    if (ln == 0 && to_lower_ascii(trim(cols[0])) == "id") continue;
    if (cols.size() != 4) throw ParseError("expected 4 tab-separated columns", ln + 1);
    Item item;
    item.id = std::string(trim(cols[0]));
    item.text = std::string(cols[1]);
    auto emotion = parse_emotion(cols[2]);
    if (!emotion) throw ParseError("unknown emotion '" + std::string(cols[2]) + "'", ln + 1);
    item.emotion = *emotion;
    item.partition = partition;
    if (trim(cols[3]) != "NONE") {
      auto score = parse_double(cols[3]);
      if (!score) throw ParseError("malformed score", ln + 1);
      item.gold_score = *score;
    }
    validate_item(item);
    ds.items.push_back(std::move(item));
  }
  validate_dataset(ds);
  return ds;
}

/// Concatenates datasets of the same emotion (e.g. train + dev + test files).
inline Dataset merge_datasets(const std::vector<Dataset>& parts) {
  Dataset out;
  for (const auto& p : parts) out.items.insert(out.items.end(), p.items.begin(), p.items.end());
  validate_dataset(out);
  return out;
}

// ---------------------------------------------------------------------------
// Hashtag handling.

namespace detail {

inline bool is_hashtag_token(std::string_view tok) { return tok.size() > 1 && tok.front() == '#'; }

// "#Angry!" -> "angry": lowercased, one trailing punctuation character dropped.
inline std::string hashtag_word(std::string_view tok) {
  std::string_view w = tok.substr(1);
  if (!w.empty() && std::ispunct(static_cast<unsigned char>(w.back())) && w.back() != '_') w.remove_suffix(1);
  return to_lower_ascii(w);
}

inline std::string join(const std::vector<std::string_view>& toks) {
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

// Index of the first token of the trailing all-hashtag run.
inline std::size_t trailing_run_start(const std::vector<std::string_view>& toks) {
  std::size_t start = toks.size();
  while (start > 0 && is_hashtag_token(toks[start - 1])) --start;
  return start;
}

}  // namespace detail

/// Removes query-term hashtags from the trailing run of hashtags. Returns
/// nullopt when the tweet has no such hashtag there (it is not an HQT tweet),
/// or when nothing but hashtags would remain.
inline std::optional<std::string> strip_trailing_hashtag(std::string_view text,
                                                         const std::set<std::string>& query_terms) {
  const auto toks = whitespace_tokens(text);
  const std::size_t start = detail::trailing_run_start(toks);
  std::vector<std::string_view> kept(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(start));
  bool removed = false;
  for (std::size_t i = start; i < toks.size(); ++i) {
    if (query_terms.count(detail::hashtag_word(toks[i]))) {
      removed = true;
    } else {
      kept.push_back(toks[i]);
    }
  }
  if (!removed || kept.empty()) return std::nullopt;
  return detail::join(kept);
}

/// The query-term hashtags strip_trailing_hashtag would remove, as written.
inline std::vector<std::string> removed_hashtags(std::string_view text, const std::set<std::string>& query_terms) {
  const auto toks = whitespace_tokens(text);
  std::vector<std::string> out;
  for (std::size_t i = detail::trailing_run_start(toks); i < toks.size(); ++i) {
    if (query_terms.count(detail::hashtag_word(toks[i]))) out.emplace_back(toks[i]);
  }
  return out;
}

/// Hashtags present in the HQT text's trailing run but absent from the NQT
/// text. Used to label scatter points when query terms are unknown.
inline std::vector<std::string> hashtag_difference(std::string_view hqt, std::string_view nqt) {
  const auto htoks = whitespace_tokens(hqt);
  const auto ntoks = whitespace_tokens(nqt);
  std::multiset<std::string_view> remaining(ntoks.begin(), ntoks.end());
  std::vector<std::string> out;
  for (std::size_t i = detail::trailing_run_start(htoks); i < htoks.size(); ++i) {
    auto it = remaining.find(htoks[i]);
    if (it != remaining.end()) {
      remaining.erase(it);
    } else {
      out.emplace_back(htoks[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pairs and partitions.

struct ItemPair {
  Item hqt;
  Item nqt;
};

/// One pair per NQT item, ordered by the HQT's position in the dataset.
inline std::vector<ItemPair> hqt_nqt_pairs(const Dataset& ds) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < ds.items.size(); ++i) by_id.emplace(ds.items[i].id, i);
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& item = ds.items[i];
    if (item.kind == ItemKind::hqt && item.pair_id) {
      auto it = by_id.find(*item.pair_id);
      if (it == by_id.end() || ds.items[it->second].kind != ItemKind::nqt) {
        throw ValidationError("HQT item " + item.id + " points to missing NQT " + *item.pair_id);
      }
    }
    if (item.kind != ItemKind::nqt) continue;
    auto it = by_id.find(*item.pair_id);
    if (it == by_id.end() || ds.items[it->second].kind != ItemKind::hqt) {
      throw ValidationError("NQT item " + item.id + " has dangling pair id " + *item.pair_id);
    }
    idx.emplace_back(it->second, i);
  }
  std::sort(idx.begin(), idx.end());
  std::vector<ItemPair> out;
  out.reserve(idx.size());
  for (auto [h, n] : idx) out.push_back({ds.items[h], ds.items[n]});
  return out;
}

struct PartitionViolation {
  std::string hqt_id;
  std::string nqt_id;
  Partition hqt_partition;
  Partition nqt_partition;
};

struct PartitionReport {
  std::map<Partition, std::size_t> counts;
  std::vector<PartitionViolation> violations;
  /// NQT items whose pair id does not resolve to an HQT item.
  std::vector<std::string> dangling;

  std::size_t count(Partition p) const {
    auto it = counts.find(p);
    return it == counts.end() ? 0 : it->second;
  }
  bool ok() const { return violations.empty() && dangling.empty(); }
};

inline PartitionReport validate_partitions(const Dataset& ds) {
  PartitionReport r;
  std::unordered_map<std::string, const Item*> by_id;
  for (const auto& it : ds.items) {
    ++r.counts[it.partition];
    by_id.emplace(it.id, &it);
  }
  for (const auto& it : ds.items) {
    if (it.kind != ItemKind::nqt || !it.pair_id) continue;
    auto h = by_id.find(*it.pair_id);
    if (h == by_id.end() || h->second->kind != ItemKind::hqt) {
      r.dangling.push_back(it.id);
      continue;
    }
    if (h->second->partition != it.partition) {
      r.violations.push_back({h->second->id, it.id, h->second->partition, it.partition});
    }
  }
  return r;
}

struct PairReconstruction {
  Dataset dataset;
  std::size_t hqt_candidates = 0;  ///< tweets whose trailing run holds a query hashtag
  std::size_t matched = 0;         ///< candidates whose stripped text matched another item
  std::vector<std::string> unmatched;  ///< candidate ids with no matching copy
};

/// Best-effort pairing for data without pair metadata: an item whose stripped
/// text equals another item's text exactly becomes HQT, the other its NQT.
/// Items that already carry pair ids are left alone.
inline PairReconstruction reconstruct_pairs(const Dataset& ds, const std::set<std::string>& query_terms) {
  PairReconstruction out{ds, 0, 0, {}};
  auto& items = out.dataset.items;
  std::unordered_multimap<std::string, std::size_t> by_text;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].pair_id) by_text.emplace(detail::join(whitespace_tokens(items[i].text)), i);
  }
  std::vector<char> used(items.size(), 0);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].pair_id || used[i]) continue;
    auto stripped = strip_trailing_hashtag(items[i].text, query_terms);
    if (!stripped) continue;
    ++out.hqt_candidates;
    auto [b, e] = by_text.equal_range(*stripped);
    bool found = false;
    for (auto it = b; it != e && !found; ++it) {
      const std::size_t j = it->second;
      if (j == i || used[j] || items[j].pair_id) continue;
      items[i].kind = ItemKind::hqt;
      items[i].pair_id = items[j].id;
      items[j].kind = ItemKind::nqt;
      items[j].pair_id = items[i].id;
      used[i] = used[j] = 1;
      found = true;
    }
    if (found) {
      ++out.matched;
    } else {
      out.unmatched.push_back(items[i].id);
    }
  }
  return out;
}

}  // namespace bws
