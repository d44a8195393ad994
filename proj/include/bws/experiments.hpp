#pragma once

// Experiment harnesses: feature ablation grids, range-restricted evaluation
// and cross-emotion transfer.

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bws/corpus.hpp"
#include "bws/features.hpp"
#include "bws/regression.hpp"

namespace bws {

/// Final-model training material for one emotion: train + dev, and test.
struct EmotionSplit {
  std::vector<Item> train;
  std::vector<Item> test;
};

using ExperimentData = std::map<Emotion, EmotionSplit>;

inline EmotionSplit split_by_partition(const Dataset& ds) {
  EmotionSplit s;
  for (const auto& item : ds.items) {
    if (item.partition == Partition::unassigned) continue;
    if (!item.gold_score) throw ValidationError("item " + item.id + " has no gold score");
    (item.partition == Partition::test ? s.test : s.train).push_back(item);
  }
  return s;
}

/// Computes each extractor's output once per distinct text and assembles
/// configurations from the cached parts.
class FeatureCache {
 public:
  explicit FeatureCache(const FeatureResources& res) : res_(res) {}

  FeatureVector get(const std::string& text, const FeatureConfig& config) {
    if (config.embeddings && !res_.embeddings) throw ResourceError("feature set WE requested but no embeddings loaded");
    for (const auto& name : config.lexicons) {
      if (!res_.lexicons.count(name)) throw ResourceError("lexicon '" + name + "' requested but not loaded");
    }
    auto& e = entries_[text];
    if (!e.tokenized) {
      e.tokens = mark_negation(tokenize(text), res_.negators);
      e.tokenized = true;
    }
    FeatureVector fv;
    if (config.word_ngrams) {
      if (!e.wn) e.wn = word_ngrams(e.tokens, config.word_n_min, config.word_n_max);
      fv.merge_disjoint(*e.wn);
    }
    if (config.char_ngrams) {
      if (!e.cn) e.cn = char_ngrams(text, config.char_n_min, config.char_n_max);
      fv.merge_disjoint(*e.cn);
    }
    if (config.embeddings) {
      if (!e.we) e.we = embedding_average(e.tokens, *res_.embeddings);
      fv.merge_disjoint(*e.we);
    }
    for (const auto& name : config.lexicons) {
      auto it = e.lex.find(name);
      if (it == e.lex.end()) it = e.lex.emplace(name, lexicon_features(e.tokens, res_.lexicons.at(name))).first;
      fv.merge_disjoint(it->second);
    }
    return fv;
  }

  std::vector<Example> examples(const std::vector<Item>& items, const FeatureConfig& config) {
    std::vector<Example> out;
    out.reserve(items.size());
    for (const auto& item : items) {
      if (!item.gold_score) throw ValidationError("item " + item.id + " has no gold score");
      out.push_back({get(item.text, config), *item.gold_score});
    }
    return out;
  }

 private:
  // N-gram ranges are fixed per cache entry; configurations sharing a cache
  // must agree on them.
  struct Entry {
    bool tokenized = false;
    std::vector<Token> tokens;
    std::optional<FeatureVector> wn, cn, we;
    std::map<std::string, FeatureVector> lex;
  };
  const FeatureResources& res_;
  std::unordered_map<std::string, Entry> entries_;
};

struct NamedConfig {
  std::string label;
  FeatureConfig config;
};

struct AblationTable {
  std::vector<std::string> rows;
  std::vector<Emotion> columns;
  std::vector<std::vector<EvalResult>> cells;  ///< [row][column]
  std::vector<double> average;                 ///< macro-average Pearson per row
};

/// Trains on each emotion's train split and evaluates on its test split for
/// every configuration. With `subset_threshold`, evaluation is restricted to
/// test items with gold at or above it.
inline AblationTable ablation_run(const ExperimentData& data, const std::vector<NamedConfig>& configs,
                                  const FeatureResources& res, const Hyperparams& hp = {},
                                  std::optional<double> subset_threshold = std::nullopt) {
  if (data.empty()) throw ValidationError("ablation needs at least one emotion");
  if (configs.empty()) throw ValidationError("ablation needs at least one feature configuration");
  FeatureCache cache(res);
  AblationTable t;
  for (const auto& [e, split] : data) t.columns.push_back(e);
  for (const auto& nc : configs) {
    t.rows.push_back(nc.label);
    std::vector<EvalResult> row;
    double sum = 0;
    for (const auto& [e, split] : data) {
      const auto train_ex = cache.examples(split.train, nc.config);
      const auto test_ex = cache.examples(split.test, nc.config);
      const auto model = train(train_ex, hp);
      row.push_back(subset_threshold ? evaluate_subset(model, test_ex, *subset_threshold) : evaluate(model, test_ex));
      sum += row.back().pearson;
    }
    t.average.push_back(sum / static_cast<double>(row.size()));
    t.cells.push_back(std::move(row));
  }
  return t;
}

struct TransferMatrix {
  std::vector<Emotion> emotions;
  std::vector<std::vector<EvalResult>> cells;  ///< [train emotion][test emotion]
};

/// Cell (i, j): model trained on emotion i's train split, evaluated on
/// emotion j's test split. Cells are computed independently.
inline TransferMatrix transfer_matrix(const ExperimentData& data, const FeatureConfig& config,
                                      const FeatureResources& res, const Hyperparams& hp = {}) {
  if (data.empty()) throw ValidationError("transfer needs at least one emotion");
  FeatureCache cache(res);
  TransferMatrix m;
  std::map<Emotion, std::vector<Example>> tests;
  for (const auto& [e, split] : data) {
    m.emotions.push_back(e);
    tests.emplace(e, cache.examples(split.test, config));
  }
  for (const auto& [train_e, split] : data) {
    const auto model = train(cache.examples(split.train, config), hp);
    std::vector<EvalResult> row;
    for (const auto& test_e : m.emotions) row.push_back(evaluate(model, tests.at(test_e)));
    m.cells.push_back(std::move(row));
  }
  return m;
}

/// Trains on the union of several emotions' train splits and evaluates on
/// one emotion's test split.
inline EvalResult pooled_transfer(const ExperimentData& data, const std::vector<Emotion>& train_emotions,
                                  Emotion test_emotion, const FeatureConfig& config, const FeatureResources& res,
                                  const Hyperparams& hp = {}) {
  if (train_emotions.empty()) throw ValidationError("pooled training needs at least one emotion");
  FeatureCache cache(res);
  std::vector<Example> pooled;
  for (auto e : train_emotions) {
    auto it = data.find(e);
    if (it == data.end()) throw ValidationError("no data for " + std::string(to_string(e)));
    auto ex = cache.examples(it->second.train, config);
    pooled.insert(pooled.end(), ex.begin(), ex.end());
  }
  auto it = data.find(test_emotion);
  if (it == data.end()) throw ValidationError("no data for " + std::string(to_string(test_emotion)));
  return evaluate(train(pooled, hp), cache.examples(it->second.test, config));
}

// ---------------------------------------------------------------------------
// Output: human-readable grids (two decimals) and flat files at full precision.

inline std::string format_ablation_grid(const AblationTable& t, int decimals = 2) {
  std::string out = "features";
  for (auto e : t.columns) out += '\t' + std::string(to_string(e));
  out += "\tavg.\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out += t.rows[r];
    for (const auto& cell : t.cells[r]) out += '\t' + format_fixed(cell.pearson, decimals);
    out += '\t' + format_fixed(t.average[r], decimals) + '\n';
  }
  return out;
}

inline std::string format_ablation_flat(const AblationTable& t) {
  std::string out = "features\temotion\tpearson\tspearman\tn\tsubset_threshold\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& cell = t.cells[r][c];
      out += t.rows[r] + '\t' + std::string(to_string(t.columns[c])) + '\t' + format_double(cell.pearson) + '\t' +
             format_double(cell.spearman) + '\t' + std::to_string(cell.n) + '\t' +
             (cell.subset_threshold ? format_double(*cell.subset_threshold) : "NONE") + '\n';
    }
    out += t.rows[r] + "\tavg.\t" + format_double(t.average[r]) + "\tNONE\tNONE\tNONE\n";
  }
  return out;
}

inline std::string format_transfer_grid(const TransferMatrix& m, int decimals = 2) {
  std::string out = "train\\test";
  for (auto e : m.emotions) out += '\t' + std::string(to_string(e));
  out += '\n';
  for (std::size_t i = 0; i < m.emotions.size(); ++i) {
    out += std::string(to_string(m.emotions[i]));
    for (const auto& cell : m.cells[i]) out += '\t' + format_fixed(cell.pearson, decimals);
    out += '\n';
  }
  return out;
}

inline std::string format_transfer_flat(const TransferMatrix& m) {
  std::string out = "train\ttest\tpearson\tspearman\tn\n";
  for (std::size_t i = 0; i < m.emotions.size(); ++i) {
    for (std::size_t j = 0; j < m.emotions.size(); ++j) {
      const auto& cell = m.cells[i][j];
      out += std::string(to_string(m.emotions[i])) + '\t' + std::string(to_string(m.emotions[j])) + '\t' +
             format_double(cell.pearson) + '\t' + format_double(cell.spearman) + '\t' + std::to_string(cell.n) +
             '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared-task release directories.
//
// Layout: <emotion>-ratings-0to1.train.txt, <emotion>-ratings-0to1.dev.gold.txt
// (or .dev.txt) and <emotion>-ratings-0to1.test.gold.txt. Optional resources:
// embeddings.txt and lexicons/*.tsv in the lexicon format.

namespace detail {

inline std::optional<std::string> first_existing(const std::filesystem::path& dir,
                                                 std::initializer_list<std::string> names) {
  for (const auto& n : names) {
    if (std::filesystem::exists(dir / n)) return (dir / n).string();
  }
  return std::nullopt;
}

}  // namespace detail

/// Loads one emotion's release files, or nullopt when any split is missing.
inline std::optional<Dataset> load_release_dir(const std::string& dir, Emotion e) {
  const std::string stem = std::string(to_string(e)) + "-ratings-0to1.";
  const auto train = detail::first_existing(dir, {stem + "train.txt", stem + "train.gold.txt"});
  const auto dev = detail::first_existing(dir, {stem + "dev.gold.txt", stem + "dev.txt"});
  const auto test = detail::first_existing(dir, {stem + "test.gold.txt", stem + "test.txt"});
  if (!train || !dev || !test) return std::nullopt;
  return merge_datasets({parse_release(read_file(*train), Partition::train),
                         parse_release(read_file(*dev), Partition::dev),
                         parse_release(read_file(*test), Partition::test)});
}

/// Loads embeddings.txt and lexicons/*.tsv when present. Only words in
/// `vocabulary` are kept from the embedding file when it is non-empty.
inline FeatureResources load_resource_dir(const std::string& dir, const std::set<std::string>& vocabulary = {}) {
  namespace fs = std::filesystem;
  FeatureResources res;
  const fs::path root(dir);
  if (fs::exists(root / "embeddings.txt")) {
    res.embeddings = std::make_shared<const EmbeddingTable>(
        load_embeddings((root / "embeddings.txt").string(), vocabulary.empty() ? nullptr : &vocabulary));
  }
  if (fs::is_directory(root / "lexicons")) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / "lexicons")) {
      if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto lex = load_lexicon(f.string());
      const auto name = lex.name;
      if (!res.lexicons.emplace(name, std::move(lex)).second) throw ResourceError("duplicate lexicon name " + name);
    }
  }
  return res;
}

/// Token surfaces of all item texts;
/// used to filter large embedding files at load time.
inline std::set<std::string> vocabulary_of(const std::vector<const Dataset*>& datasets) {
  std::set<std::string> vocab;
  for (const auto* ds : datasets) {
    for (const auto& item : ds->items) {
      for (const auto& t : tokenize(item.text)) vocab.insert(t.surface);
    }
  }
  return vocab;
}

}  // namespace bws
