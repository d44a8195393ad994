#pragma once

// Tweet feature extraction: tokenization, negation scope marking, word and
// character n-grams, averaged word embeddings, and affect-lexicon aggregates.
//
// Feature names are namespaced by extractor: "wn:", "cn:", "we:" and
// "lex:<lexicon>:<class>".

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bws/common.hpp"

namespace bws {

struct Token {
  std::string surface;
  bool negated = false;

  /// Surface as seen by n-gram and lexicon features.
  std::string rendered() const { return negated ? "NEG-" + surface : surface; }
  bool operator==(const Token&) const = default;
};

/// Sparse vector with no stored zeros, iterated in name order.
class FeatureVector {
 public:
  using Map = std::map<std::string, double>;

  void set(const std::string& name, double value) {
    if (value == 0.0) {
      entries_.erase(name);
    } else {
      entries_[name] = value;
    }
  }
  void add(const std::string& name, double delta) {
    auto& v = entries_[name];
    v += delta;
    if (v == 0.0) entries_.erase(name);
  }
  double get(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? 0.0 : it->second;
  }
  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }
  const Map& entries() const { return entries_; }

  /// Union with a vector from another extractor; names must not collide.
  void merge_disjoint(const FeatureVector& other) {
    for (const auto& [k, v] : other.entries_) {
      if (!entries_.emplace(k, v).second) throw ValidationError("feature name collision: " + k);
    }
  }

  bool operator==(const FeatureVector&) const = default;

 private:
  Map entries_;
};

inline std::string serialize_features(const FeatureVector& fv) {
  std::string out;
  for (const auto& [k, v] : fv) out += k + '\t' + format_double(v) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizer.

namespace detail {

struct CodePoint {
  char32_t value;
  std::size_t length;
};

inline CodePoint decode_utf8(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> bool {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if (c < 0x80) return {c, 1};
  if ((c & 0xE0) == 0xC0 && cont(1)) {
    return {static_cast<char32_t>(((c & 0x1F) << 6) | (s[i + 1] & 0x3F)), 2};
  }
  if ((c & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    return {static_cast<char32_t>(((c & 0x0F) << 12) | ((s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F)), 3};
  }
  if ((c & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    return {static_cast<char32_t>(((c & 0x07) << 18) | ((s[i + 1] & 0x3F) << 12) | ((s[i + 2] & 0x3F) << 6) |
                                  (s[i + 3] & 0x3F)),
            4};
  }
  return {0xFFFD, 1};  // stray byte
}

inline bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Letters, digits and underscore, plus non-ASCII code points from alphabetic
// script blocks (Latin-1 letters through CJK). Symbols such as emoji are not
// word characters.
inline bool is_word_cp(char32_t cp) {
  if (cp < 0x80) return is_ascii_alnum(static_cast<char>(cp)) || cp == '_';
  if (cp == 0xD7 || cp == 0xF7) return false;
  return (cp >= 0xC0 && cp < 0x2000) || (cp >= 0x3040 && cp < 0xD800) || (cp >= 0xF900 && cp < 0xFE00);
}

// Modifiers that stay attached to the preceding symbol: variation selectors,
// zero-width joiner, skin tones.
inline bool is_symbol_modifier(char32_t cp) {
  return cp == 0x200D || (cp >= 0xFE00 && cp <= 0xFE0F) || (cp >= 0x1F3FB && cp <= 0x1F3FF);
}

inline bool is_space_cp(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0xA0 ||
         (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000;
}

inline bool word_at(std::string_view s, std::size_t i) { return i < s.size() && is_word_cp(decode_utf8(s, i).value); }

inline bool starts_with_ci(std::string_view s, std::size_t i, std::string_view prefix) {
  if (s.size() - i < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    char c = s[i + k];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[k]) return false;
  }
  return true;
}

inline bool boundary_before(std::string_view s, std::size_t i) {
  return i == 0 || !is_ascii_alnum(s[i - 1]);
}

// Length of an emoticon starting at i, or 0.
inline std::size_t match_emoticon(std::string_view s, std::size_t i) {
  static const std::string_view fixed[] = {"</3", "<3", "^_^", "^.^", "^^", "-_-", "o_o", "O_O", "o.O", "O.o",
                                           ">_<", "T_T", ";_;", "xD", "XD"};
  for (auto f : fixed) {
    if (s.substr(i, f.size()) == f) {
      const bool alpha_edge = is_ascii_alnum(f.front()) || is_ascii_alnum(f.back());
      if (alpha_edge && (!boundary_before(s, i) || (i + f.size() < s.size() && is_ascii_alnum(s[i + f.size()])))) continue;
      return f.size();
    }
  }
  auto in = [](char c, std::string_view set) { return set.find(c) != std::string_view::npos; };
  const std::string_view eyes = ":;=8xX";
  const std::string_view noses = "-o*'^";
  const std::string_view mouths = ")](\\[dDpP/|}{@3*$oO0";
  // eyes [nose] mouth+
  if (i < s.size() && in(s[i], eyes)) {
    if (is_ascii_alnum(s[i]) && !boundary_before(s, i)) return 0;
    std::size_t j = i + 1;
    if (j < s.size() && in(s[j], noses) && j + 1 < s.size() && in(s[j + 1], mouths)) ++j;
    if (j < s.size() && in(s[j], mouths)) {
      const char mouth = s[j];
      std::size_t k = j + 1;
      if (!is_ascii_alnum(mouth)) {
        while (k < s.size() && s[k] == mouth) ++k;
      }
      if (k < s.size() && is_ascii_alnum(s[k]) && (is_ascii_alnum(mouth) || is_ascii_alnum(s[i]))) return 0;
      return k - i;
    }
  }
  // mouth [nose] eyes, e.g. "(:" or "(-:"
  if (i < s.size() && in(s[i], "()[]")) {
    std::size_t j = i + 1;
    if (j < s.size() && in(s[j], "-'") ) ++j;
    if (j < s.size() && in(s[j], ":;=")) {
      if (j + 1 < s.size() && is_ascii_alnum(s[j + 1])) return 0;
      return j + 1 - i;
    }
  }
  return 0;
}

inline bool tag_at(std::string_view s, std::size_t i) {
  return i + 1 < s.size() && (s[i] == '#' || s[i] == '@') && word_at(s, i + 1);
}

inline bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

inline std::string normalize_apostrophes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.substr(i, 3) == "\xE2\x80\x99" || s.substr(i, 3) == "\xE2\x80\x98") {  // U+2019, U+2018
      out += '\'';
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace detail

/// Rule-based tweet tokenizer. Tokens other than emoticons are lowercased; URLs, @-mentions,
/// hashtags and emoticons stay whole; punctuation runs become separate tokens.
inline std::vector<Token> tokenize(std::string_view raw) {
  using namespace detail;
  const std::string text = normalize_apostrophes(raw);
  const std::string_view s = text;
  std::vector<Token> out;
  auto emit = [&](std::size_t b, std::size_t e) { out.push_back({to_lower_ascii(s.substr(b, e - b)), false}); };
  std::size_t i = 0;
  while (i < s.size()) {
    const auto cp = decode_utf8(s, i);
    if (is_space_cp(cp.value)) {
      i += cp.length;
      continue;
    }
    const std::size_t start = i;
    // URL
    if (starts_with_ci(s, i, "http://") || starts_with_ci(s, i, "https://") ||
        (starts_with_ci(s, i, "www.") && boundary_before(s, i))) {
      while (i < s.size() && !is_space_cp(decode_utf8(s, i).value)) i += decode_utf8(s, i).length;
      emit(start, i);
      continue;
    }
    // @mention / #hashtag
    if (tag_at(s, i)) {
      ++i;
      while (word_at(s, i)) i += decode_utf8(s, i).length;
      emit(start, i);
      continue;
    }
    if (const auto len = match_emoticon(s, i)) {
      out.push_back({std::string(s.substr(i, len)), false});  // case kept: ":D" vs ":d"
      i += len;
      continue;
    }
    // number with separators, e.g. 3.5 or 1,000
    if (s[i] >= '0' && s[i] <= '9') {
      std::size_t j = i;
      while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
      bool grouped = false;
      while (j + 1 < s.size() && (s[j] == '.' || s[j] == ',') && s[j + 1] >= '0' && s[j + 1] <= '9') {
        j += 1;
        while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
        grouped = true;
      }
      if (grouped && !word_at(s, j)) {
        emit(i, j);
        i = j;
        continue;
      }
    }
    // word with internal apostrophes
    if (is_word_cp(cp.value)) {
      while (true) {
        while (word_at(s, i)) i += decode_utf8(s, i).length;
        if (i + 1 < s.size() && s[i] == '\'' && word_at(s, i + 1)) {
          ++i;
          continue;
        }
        break;
      }
      emit(start, i);
      continue;
    }
    // punctuation run
    if (cp.value < 0x80 && is_ascii_punct(s[i])) {
      ++i;
      while (i < s.size() && is_ascii_punct(s[i]) && !tag_at(s, i) && !match_emoticon(s, i)) ++i;
      emit(start, i);
      continue;
    }
    // other symbols (emoji etc.), one code point plus modifiers
    if (cp.value >= 0x80) {
      i += cp.length;
      while (i < s.size() && is_symbol_modifier(decode_utf8(s, i).value)) i += decode_utf8(s, i).length;
      emit(start, i);
      continue;
    }
    i += cp.length;  // control characters
  }
  return out;
}

// ---------------------------------------------------------------------------
// Negation.

/// Default negator list (28 words).
inline const std::set<std::string>& default_negators() {
  static const std::set<std::string> words = {
      "no",       "not",     "never",   "won't",    "can't",     "don't",    "cannot",
      "nothing",  "nowhere", "noone",   "none",     "hasn't",    "hadn't",   "haven't",
      "isn't",    "aren't",  "wasn't",  "weren't",  "wouldn't",  "couldn't", "shouldn't",
      "doesn't",  "didn't",  "mustn't", "mightn't", "needn't",   "ain't",    "nor"};
  return words;
}

/// Word-per-line negator file; blank lines and '#' comments ignored.
inline std::set<std::string> parse_negators(std::string_view text) {
  std::set<std::string> out;
  for (auto line : lines_of(text)) {
    auto w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    out.insert(to_lower_ascii(detail::normalize_apostrophes(w)));
  }
  return out;
}

/// Tokens that close a negation scope.
inline bool is_scope_punctuation(std::string_view surface) {
  if (surface.empty()) return false;
  for (char c : surface) {
    if (std::string_view(".,!?;:").find(c) == std::string_view::npos) return false;
  }
  return true;
}

/// Flags tokens after a negator, up to the next punctuation token.
inline std::vector<Token> mark_negation(std::vector<Token> tokens,
                                        const std::set<std::string>& negators = default_negators()) {
  bool in_scope = false;
  for (auto& t : tokens) {
    if (is_scope_punctuation(t.surface)) {
      in_scope = false;
      t.negated = false;
      continue;
    }
    t.negated = in_scope;
    if (negators.count(t.surface)) in_scope = true;
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// N-grams.

/// Presence features for word n-grams over rendered surfaces.
inline FeatureVector word_ngrams(const std::vector<Token>& tokens, std::size_t n_min = 1, std::size_t n_max = 4) {
  if (n_min == 0 || n_min > n_max) throw ValidationError("word n-gram range must satisfy 1 <= n_min <= n_max");
  FeatureVector fv;
  std::vector<std::string> rendered;
  rendered.reserve(tokens.size());
  for (const auto& t : tokens) rendered.push_back(t.rendered());
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    std::string gram = "wn:";
    for (std::size_t n = 1; n <= n_max && i + n <= rendered.size(); ++n) {
      if (n > 1) gram += ' ';
      gram += rendered[i + n - 1];
      if (n >= n_min) fv.set(gram, 1.0);
    }
  }
  return fv;
}

/// Presence features for character n-grams (code points) of the lowercased
/// text with whitespace runs collapsed to one space.
inline FeatureVector char_ngrams(std::string_view text, std::size_t n_min = 3, std::size_t n_max = 5) {
  if (n_min == 0 || n_min > n_max) throw ValidationError("char n-gram range must satisfy 1 <= n_min <= n_max");
  std::vector<std::string> cps;
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size();) {
    const auto cp = detail::decode_utf8(text, i);
    if (detail::is_space_cp(cp.value)) {
      pending_space = !cps.empty();
    } else {
      if (pending_space) cps.emplace_back(" ");
      pending_space = false;
      cps.push_back(to_lower_ascii(text.substr(i, cp.length)));
    }
    i += cp.length;
  }
  FeatureVector fv;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    std::string gram = "cn:";
    for (std::size_t n = 1; n <= n_max && i + n <= cps.size(); ++n) {
      gram += cps[i + n - 1];
      if (n >= n_min) fv.set(gram, 1.0);
    }
  }
  return fv;
}

// ---------------------------------------------------------------------------
// Embeddings.

/// Pre-trained word vectors: a header line "d" (or "count d"), then one word
/// per line followed by d space-separated reals.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw ValidationError("embedding dimension must be positive");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return index_.size(); }

  /// Adds a vector; returns false (and keeps the old one) for a repeated word.
  bool add(const std::string& word, std::span<const float> v) {
    if (v.size() != dimension_) throw ValidationError("vector for '" + word + "' has wrong dimension");
    for (float x : v) {
      if (!std::isfinite(x)) throw ValidationError("non-finite component in vector for '" + word + "'");
    }
    if (!index_.emplace(word, index_.size()).second) return false;
    data_.insert(data_.end(), v.begin(), v.end());
    return true;
  }

  std::optional<std::span<const float>> find(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return std::span<const float>(data_.data() + it->second * dimension_, dimension_);
  }

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

/// Parses the embedding text format. Words are lowercased; when `vocabulary`
/// is given, other words are skipped to save memory.
inline EmbeddingTable parse_embeddings(std::string_view text, const std::set<std::string>* vocabulary = nullptr) {
  std::size_t ln = 0;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(pos, end - pos);
      pos = end + 1;
      ++ln;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!trim(line).empty()) return line;
    }
    return std::nullopt;
  };
  auto header = next_line();
  if (!header) throw ParseError("empty embedding file", 0);
  const auto head = whitespace_tokens(*header);
  std::optional<long long> dim;
  if (head.size() == 1) dim = parse_int(head[0]);
  if (head.size() == 2) dim = parse_int(head[1]);
  if (!dim || *dim <= 0) throw ParseError("expected header with the vector dimension", ln);
  EmbeddingTable table(static_cast<std::size_t>(*dim));
  std::vector<float> v(table.dimension());
  while (auto line = next_line()) {
    const auto fields = whitespace_tokens(*line);
    if (fields.size() != table.dimension() + 1) {
      throw ParseError("expected a word and " + std::to_string(table.dimension()) + " values, found " +
                           std::to_string(fields.size()) + " fields",
                       ln);
    }
    std::string word = to_lower_ascii(fields[0]);
    if (vocabulary && !vocabulary->count(word)) continue;
    for (std::size_t k = 0; k < table.dimension(); ++k) {
      auto x = parse_double(fields[k + 1]);
      if (!x) throw ParseError("malformed vector component '" + std::string(fields[k + 1]) + "'", ln);
      v[k] = static_cast<float>(*x);
    }
    table.add(word, v);
  }
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path, const std::set<std::string>* vocabulary = nullptr) {
  return parse_embeddings(read_file(path), vocabulary);
}

/// Mean vector over in-vocabulary tokens (looked up by surface, ignoring the
/// negation flag). All-OOV input gives the empty (zero) vector.
inline FeatureVector embedding_average(const std::vector<Token>& tokens, const EmbeddingTable& table) {
  if (table.size() == 0) throw ResourceError("embedding table is empty");
  std::vector<double> sum(table.dimension(), 0.0);
  std::size_t found = 0;
  for (const auto& t : tokens) {
    auto v = table.find(t.surface);
    if (!v) continue;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += (*v)[k];
    ++found;
  }
  FeatureVector fv;
  if (found == 0) return fv;
  for (std::size_t k = 0; k < sum.size(); ++k) fv.set("we:" + std::to_string(k), sum[k] / static_cast<double>(found));
  return fv;
}

// ---------------------------------------------------------------------------
// Lexicons.

enum class LexiconMode { nominal, numeric };

struct Lexicon {
  std::string name;
  LexiconMode mode = LexiconMode::nominal;
  std::set<std::string> classes;
  /// word -> (class, value); nominal values are 1.
  std::unordered_map<std::string, std::vector<std::pair<std::string, double>>> entries;
  /// Rows skipped because the (word, class) pair was already present.
  std::size_t duplicates_ignored = 0;
};

/// Lexicon TSV. Header: "#lexicon<TAB>mode=nominal|numeric" with optional
/// "name=<name>" and "classes=a,b" fields. Rows: word, class, value (the value
/// may be omitted for nominal lexicons; a nominal value of 0 means "not a
/// member" and the row is skipped).
inline Lexicon parse_lexicon(std::string_view text, const std::string& fallback_name) {
  const auto lines = lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw ParseError("empty lexicon file", 0);
  const auto head = split(lines[first], '\t');
  if (head[0] != "#lexicon") throw ParseError("expected '#lexicon' header declaring the mode", first + 1);
  Lexicon lex;
  lex.name = fallback_name;
  bool have_mode = false;
  std::set<std::string> declared;
  for (std::size_t k = 1; k < head.size(); ++k) {
    auto field = trim(head[k]);
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) throw ParseError("malformed header field '" + std::string(field) + "'", first + 1);
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    if (key == "mode") {
      if (value == "nominal") {
        lex.mode = LexiconMode::nominal;
      } else if (value == "numeric") {
        lex.mode = LexiconMode::numeric;
      } else {
        throw ParseError("unknown lexicon mode '" + std::string(value) + "'", first + 1);
      }
      have_mode = true;
    } else if (key == "name") {
      lex.name = std::string(value);
    } else if (key == "classes") {
      for (auto c : split(value, ',')) {
        if (!trim(c).empty()) declared.emplace(trim(c));
      }
    }
  }
  if (!have_mode) throw ParseError("lexicon header lacks mode=", first + 1);
  if (lex.name.empty() || lex.name.find(':') != std::string::npos) {
    throw ValidationError("lexicon name must be non-empty and free of ':'");
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t ln = first + 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto cols = split(lines[ln], '\t');
    if (cols.size() != 3 && !(cols.size() == 2 && lex.mode == LexiconMode::nominal)) {
      throw ParseError("expected word, class, value", ln + 1);
    }
    std::string word = to_lower_ascii(trim(cols[0]));
    if (word.rfind("neg-", 0) == 0 && word.size() > 4) word = "NEG-" + word.substr(4);  // matches Token::rendered
    std::string cls(trim(cols[1]));
    if (word.empty() || cls.empty()) throw ParseError("empty word or class", ln + 1);
    double value = 1.0;
    if (cols.size() == 3) {
      auto v = parse_double(cols[2]);
      if (!v || !std::isfinite(*v)) throw ParseError("malformed value '" + std::string(cols[2]) + "'", ln + 1);
      value = *v;
    }
    if (lex.mode == LexiconMode::nominal) {
      if (value == 0.0) continue;
      if (value != 1.0) throw ParseError("nominal lexicon values must be 0 or 1", ln + 1);
    }
    if (!declared.empty() && !declared.count(cls)) {
      throw ValidationError("line " + std::to_string(ln + 1) + ": class '" + cls + "' not declared in header");
    }
    if (!seen.emplace(word, cls).second) {
      ++lex.duplicates_ignored;
      continue;
    }
    lex.classes.insert(cls);
    lex.entries[word].emplace_back(cls, value);
  }
  for (const auto& c : declared) lex.classes.insert(c);
  return lex;
}

inline Lexicon load_lexicon(const std::string& path) {
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.find('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return parse_lexicon(read_file(path), stem);
}

/// Per-class match counts (nominal) or score sums (numeric) over token
/// occurrences. Negated tokens match only a "NEG-" entry.
inline FeatureVector lexicon_features(const std::vector<Token>& tokens, const Lexicon& lexicon) {
  std::map<std::string, double> sums;
  for (const auto& t : tokens) {
    auto it = lexicon.entries.find(t.rendered());
    if (it == lexicon.entries.end()) continue;
    for (const auto& [cls, value] : it->second) sums[cls] += value;
  }
  FeatureVector fv;
  for (const auto& [cls, v] : sums) fv.set("lex:" + lexicon.name + ":" + cls, v);
  return fv;
}

// ---------------------------------------------------------------------------
// Assembly.

struct FeatureConfig {
  bool word_ngrams = false;
  bool char_ngrams = false;
  bool embeddings = false;
  /// Lexicon names to aggregate (the "L" feature set when all are listed).
  std::vector<std::string> lexicons;
  std::size_t word_n_min = 1, word_n_max = 4;
  std::size_t char_n_min = 3, char_n_max = 5;

  bool empty() const { return !word_ngrams && !char_ngrams && !embeddings && lexicons.empty(); }

  /// Parses labels like "WN+CN", "WE+L" or "L=NRC-Hash-Emo". A bare "L"
  /// expands to `all_lexicons`.
  static FeatureConfig parse(std::string_view spec, const std::vector<std::string>& all_lexicons) {
    FeatureConfig c;
    for (auto part : split(spec, '+')) {
      const auto p = trim(part);
      if (p == "WN") {
        c.word_ngrams = true;
      } else if (p == "CN") {
        c.char_ngrams = true;
      } else if (p == "WE") {
        c.embeddings = true;
      } else if (p == "L") {
        if (all_lexicons.empty()) throw ResourceError("feature set L requested but no lexicons are loaded");
        c.lexicons.insert(c.lexicons.end(), all_lexicons.begin(), all_lexicons.end());
      } else if (p.substr(0, 2) == "L=" || p.substr(0, 2) == "L:") {
        for (auto name : split(p.substr(2), ',')) {
          if (!trim(name).empty()) c.lexicons.emplace_back(trim(name));
        }
      } else {
        throw ValidationError("unknown feature set '" + std::string(p) + "' (expected WN, CN, WE, L or L=<name>)");
      }
    }
    if (c.empty()) throw ValidationError("empty feature configuration");
    return c;
  }
};

struct FeatureResources {
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::map<std::string, Lexicon> lexicons;
  std::set<std::string> negators = default_negators();

  std::vector<std::string> lexicon_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : lexicons) out.push_back(k);
    return out;
  }
};

/// Union of the selected extractors over one shared tokenization.
inline FeatureVector assemble(std::string_view text, const FeatureConfig& config, const FeatureResources& res) {
  if (config.embeddings && !res.embeddings) throw ResourceError("feature set WE requested but no embeddings loaded");
  for (const auto& name : config.lexicons) {
    if (!res.lexicons.count(name)) throw ResourceError("lexicon '" + name + "' requested but not loaded");
  }
  const auto tokens = mark_negation(tokenize(text), res.negators);
  FeatureVector fv;
  if (config.word_ngrams) fv.merge_disjoint(word_ngrams(tokens, config.word_n_min, config.word_n_max));
  if (config.char_ngrams) fv.merge_disjoint(char_ngrams(text, config.char_n_min, config.char_n_max));
  if (config.embeddings) fv.merge_disjoint(embedding_average(tokens, *res.embeddings));
  for (const auto& name : config.lexicons) fv.merge_disjoint(lexicon_features(tokens, res.lexicons.at(name)));
  return fv;
}

}  // namespace bws
