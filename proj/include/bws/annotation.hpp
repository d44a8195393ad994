#pragma once

// Best-worst annotation protocol: per-annotator question streams with gold
// questions interleaved, the 70% gold-accuracy gate, response collection, and
// a simulated annotator pool for end-to-end testing.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bws/common.hpp"
#include "bws/design.hpp"
#include "json.hpp"

namespace bws {

struct GoldQuestion {
  std::size_t tuple_index = 0;
  std::set<std::string> acceptable_best;
  std::set<std::string> acceptable_worst;

  bool accepts(std::string_view best, std::string_view worst) const {
    return acceptable_best.count(std::string(best)) && acceptable_worst.count(std::string(worst));
  }
  bool operator==(const GoldQuestion&) const = default;
};

struct Response {
  std::string annotator_id;
  std::size_t tuple_index = 0;
  std::string best;
  std::string worst;
  /// Monotonic acceptance order within a session.
  std::uint64_t ordinal = 0;

  bool operator==(const Response&) const = default;
};

enum class AnnotatorStatus { active, rejected };

struct AnnotatorState {
  std::string annotator_id;
  std::size_t gold_seen = 0;
  std::size_t gold_correct = 0;
  AnnotatorStatus status = AnnotatorStatus::active;

  double gold_accuracy() const {
    return gold_seen == 0 ? 1.0 : static_cast<double>(gold_correct) / static_cast<double>(gold_seen);
  }
  bool operator==(const AnnotatorState&) const = default;
};

struct ResponseSet {
  std::shared_ptr<const TupleDesign> design;
  std::vector<Response> responses;
  std::size_t per_tuple = 3;
};

class AnnotatorRejected : public Error {
 public:
  explicit AnnotatorRejected(const std::string& annotator)
      : Error("annotator " + annotator +
              " was refused further annotation: gold-question accuracy fell below 70%, and all of "
              "their annotations were discarded"),
        annotator_(annotator) {}
  const std::string& annotator() const noexcept { return annotator_; }

 private:
  std::string annotator_;
};

class UnknownAnnotator : public ValidationError {
 public:
  explicit UnknownAnnotator(const std::string& annotator)
      : ValidationError("unknown annotator " + annotator) {}
};

/// A response for a tuple the annotator was not given.
class NotAssigned : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Validates the per-response invariants against a design.
inline void validate_response(const TupleDesign& design, const Response& r) {
  if (r.tuple_index >= design.tuples.size()) {
    throw ValidationError("response references tuple " + std::to_string(r.tuple_index) + " of " +
                          std::to_string(design.tuples.size()));
  }
  if (r.best == r.worst) throw ValidationError("best and worst must differ (both " + r.best + ")");
  const auto ids = design.tuple_ids(r.tuple_index);
  auto in_tuple = [&](const std::string& id) { return std::find(ids.begin(), ids.end(), id) != ids.end(); };
  if (!in_tuple(r.best)) throw ValidationError("best item " + r.best + " is not in tuple " + std::to_string(r.tuple_index));
  if (!in_tuple(r.worst)) throw ValidationError("worst item " + r.worst + " is not in tuple " + std::to_string(r.tuple_index));
}

inline void validate_gold(const TupleDesign& design, const GoldQuestion& g) {
  if (g.tuple_index >= design.tuples.size()) {
    throw ValidationError("gold question references tuple " + std::to_string(g.tuple_index) + " of " +
                          std::to_string(design.tuples.size()));
  }
  if (g.acceptable_best.empty() || g.acceptable_worst.empty()) {
    throw ValidationError("gold question for tuple " + std::to_string(g.tuple_index) + " has an empty answer set");
  }
  const auto ids = design.tuple_ids(g.tuple_index);
  for (const auto* set : {&g.acceptable_best, &g.acceptable_worst}) {
    for (const auto& id : *set) {
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        throw ValidationError("gold answer " + id + " is not in tuple " + std::to_string(g.tuple_index));
      }
    }
  }
  for (const auto& id : g.acceptable_best) {
    if (g.acceptable_worst.count(id)) {
      throw ValidationError("gold answer " + id + " is acceptable as both best and worst");
    }
  }
}

// ---------------------------------------------------------------------------
// ResponseSet TSV: annotator_id, tuple_index, best_id, worst_id, ordinal.

inline std::string serialize_responses(const ResponseSet& rs) {
  std::string out;
  for (const auto& r : rs.responses) {
    out += r.annotator_id + '\t' + std::to_string(r.tuple_index) + '\t' + r.best + '\t' + r.worst + '\t' +
           std::to_string(r.ordinal) + '\n';
  }
  return out;
}

inline ResponseSet parse_responses(std::string_view text, std::shared_ptr<const TupleDesign> design,
                                   std::size_t per_tuple = 3) {
  ResponseSet rs{std::move(design), {}, per_tuple};
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto cols = split(lines[ln], '\t');
    if (cols.size() != 5) throw ParseError("expected 5 tab-separated columns", ln + 1);
    const auto tuple = parse_int(cols[1]);
    const auto ordinal = parse_int(cols[4]);
    if (!tuple || *tuple < 0 || !ordinal || *ordinal < 0) throw ParseError("malformed tuple index or ordinal", ln + 1);
    Response r{std::string(cols[0]), static_cast<std::size_t>(*tuple), std::string(cols[2]), std::string(cols[3]),
               static_cast<std::uint64_t>(*ordinal)};
    try {
      validate_response(*rs.design, r);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(ln + 1) + ": " + e.what());
    }
    rs.responses.push_back(std::move(r));
  }
  return rs;
}

// Gold file: tuple_index, comma-separated acceptable best ids, comma-separated
// acceptable worst ids.
inline std::vector<GoldQuestion> parse_gold(std::string_view text) {
  std::vector<GoldQuestion> out;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty() || lines[ln].front() == '#') continue;
    const auto cols = split(lines[ln], '\t');
    if (cols.size() != 3) throw ParseError("expected 3 tab-separated columns", ln + 1);
    const auto tuple = parse_int(cols[0]);
    if (!tuple || *tuple < 0) throw ParseError("malformed tuple index", ln + 1);
    GoldQuestion g;
    g.tuple_index = static_cast<std::size_t>(*tuple);
    for (auto id : split(cols[1], ',')) {
      if (!trim(id).empty()) g.acceptable_best.emplace(trim(id));
    }
    for (auto id : split(cols[2], ',')) {
      if (!trim(id).empty()) g.acceptable_worst.emplace(trim(id));
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline std::string serialize_gold(const std::vector<GoldQuestion>& gold) {
  std::string out;
  auto join = [](const std::set<std::string>& s) {
    std::string r;
    for (const auto& id : s) r += (r.empty() ? "" : ",") + id;
    return r;
  };
  for (const auto& g : gold) {
    out += std::to_string(g.tuple_index) + '\t' + join(g.acceptable_best) + '\t' + join(g.acceptable_worst) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sessions.

struct SessionConfig {
  std::size_t per_tuple = 3;
  std::uint64_t seed = 0;
  /// Golds answered before the accuracy gate starts to apply.
  std::size_t grace_golds = 3;
  double min_gold_accuracy = 0.70;
  /// Sessions refuse gold sets larger than this fraction of the design.
  double max_gold_fraction = 0.5;

  bool operator==(const SessionConfig&) const = default;
};

struct Question {
  std::size_t tuple_index = 0;
  bool gold = false;
  bool operator==(const Question&) const = default;
};

struct SubmitOutcome {
  enum class Kind { accepted, gold_feedback, rejected_annotator };
  Kind kind = Kind::accepted;
  /// Meaningful for gold_feedback and rejected_annotator.
  bool correct = false;
};

struct SessionProgress {
  std::size_t total_tuples = 0;
  std::size_t completed_tuples = 0;
  std::size_t responses = 0;
  std::size_t expected_responses = 0;
  std::size_t active_annotators = 0;
  std::size_t rejected_annotators = 0;
  bool complete = false;
};

/// One annotation run over a design. Not internally synchronized: callers
/// serialize mutations of a single session.
class Session {
 public:
  Session(std::shared_ptr<const TupleDesign> design, std::vector<GoldQuestion> gold, SessionConfig config)
      : design_(std::move(design)), gold_(std::move(gold)), config_(config) {
    if (!design_) throw ValidationError("session needs a design");
    if (config_.per_tuple < 1) throw ValidationError("per_tuple must be at least 1");
    const std::size_t tuples = design_->tuples.size();
    if (tuples == 0) throw ValidationError("session design has no tuples");
    if (static_cast<double>(gold_.size()) > config_.max_gold_fraction * static_cast<double>(tuples)) {
      throw ValidationError("gold questions make up more than 50% of the design (" + std::to_string(gold_.size()) +
                            " of " + std::to_string(tuples) + "); interleaving would degenerate");
    }
    std::set<std::size_t> gold_tuples;
    for (const auto& g : gold_) {
      validate_gold(*design_, g);
      if (!gold_tuples.insert(g.tuple_index).second) {
        throw ValidationError("two gold questions for tuple " + std::to_string(g.tuple_index));
      }
    }
    accepted_.assign(tuples, 0);
    reserved_.assign(tuples, 0);
  }

  const TupleDesign& design() const { return *design_; }
  std::shared_ptr<const TupleDesign> design_ptr() const { return design_; }
  const std::vector<GoldQuestion>& gold() const { return gold_; }
  const SessionConfig& config() const { return config_; }

  /// Ordinary questions between consecutive golds, on average.
  std::size_t gold_stride() const {
    if (gold_.empty()) return 0;
    return std::max<std::size_t>(1, design_->tuples.size() / gold_.size());
  }

  bool complete() const {
    return std::all_of(accepted_.begin(), accepted_.end(), [&](std::size_t c) { return c >= config_.per_tuple; });
  }

  SessionProgress progress() const {
    SessionProgress p;
    p.total_tuples = accepted_.size();
    p.completed_tuples = static_cast<std::size_t>(
        std::count_if(accepted_.begin(), accepted_.end(), [&](std::size_t c) { return c >= config_.per_tuple; }));
    p.responses = responses_.size();
    p.expected_responses = config_.per_tuple * accepted_.size();
    for (const auto& [id, a] : annotators_) {
      (a.state.status == AnnotatorStatus::active ? p.active_annotators : p.rejected_annotators) += 1;
    }
    p.complete = p.completed_tuples == p.total_tuples;
    return p;
  }

  bool has_annotator(const std::string& id) const { return annotators_.count(id) > 0; }

  const AnnotatorState& annotator(const std::string& id) const {
    auto it = annotators_.find(id);
    if (it == annotators_.end()) throw UnknownAnnotator(id);
    return it->second.state;
  }

  /// Registers the annotator on first contact. Repeated calls return the same
  /// question until it is answered. nullopt means nothing is assignable to
  /// this annotator right now (session complete, or all remaining tuples are
  /// reserved or already answered by them).
  std::optional<Question> next_question(const std::string& annotator_id) {
    if (annotator_id.empty()) throw ValidationError("empty annotator id");
    auto& a = annotator_entry(annotator_id);
    if (a.state.status == AnnotatorStatus::rejected) throw AnnotatorRejected(annotator_id);
    if (a.pending) return a.pending;
    if (complete()) return std::nullopt;

    // A gold is only worth serving while ordinary work remains for them.
    const auto ordinary = find_ordinary(a);
    if (!ordinary) return std::nullopt;
    if (a.until_gold == 0 && a.gold_cursor < a.gold_order.size()) {
      a.pending = Question{gold_[a.gold_order[a.gold_cursor]].tuple_index, true};
      return a.pending;
    }
    a.cursor = ordinary->second + 1;
    ++reserved_[ordinary->first];
    a.pending = Question{ordinary->first, false};
    return a.pending;
  }

  /// Drops an annotator's outstanding question so others can take it.
  void release(const std::string& annotator_id) {
    auto it = annotators_.find(annotator_id);
    if (it == annotators_.end()) throw UnknownAnnotator(annotator_id);
    drop_pending(it->second);
  }

  /// Answers the annotator's outstanding question. The response ordinal is
  /// assigned by the session.
  SubmitOutcome submit(const Response& response) {
    auto it = annotators_.find(response.annotator_id);
    if (it == annotators_.end()) throw UnknownAnnotator(response.annotator_id);
    auto& a = it->second;
    if (a.state.status == AnnotatorStatus::rejected) throw AnnotatorRejected(response.annotator_id);
    validate_response(*design_, response);
    if (!a.pending || a.pending->tuple_index != response.tuple_index) {
      throw NotAssigned("tuple " + std::to_string(response.tuple_index) + " is not assigned to annotator " +
                        response.annotator_id);
    }
    const Question q = *a.pending;
    a.pending.reset();

    if (q.gold) {
      const auto& g = gold_[a.gold_order[a.gold_cursor]];
      const bool correct = g.accepts(response.best, response.worst);
      ++a.gold_cursor;
      a.until_gold = gold_gap(response.annotator_id, a.gold_cursor);
      ++a.state.gold_seen;
      if (correct) ++a.state.gold_correct;
      if (a.state.gold_seen >= config_.grace_golds && a.state.gold_accuracy() < config_.min_gold_accuracy) {
        reject(response.annotator_id, a);
        return {SubmitOutcome::Kind::rejected_annotator, correct};
      }
      return {SubmitOutcome::Kind::gold_feedback, correct};
    }

    --reserved_[q.tuple_index];
    ++accepted_[q.tuple_index];
    a.answered.insert(q.tuple_index);
    if (a.until_gold > 0) --a.until_gold;
    Response stored = response;
    stored.ordinal = next_ordinal_++;
    responses_.push_back(std::move(stored));
    return {SubmitOutcome::Kind::accepted, false};
  }

  /// Accepted ordinary responses of active annotators.
  ResponseSet response_set() const { return ResponseSet{design_, responses_, config_.per_tuple}; }
  const std::vector<Response>& responses() const { return responses_; }

  nlohmann::json to_json() const;
  static Session from_json(const nlohmann::json& j);

 private:
  struct Annotator {
    AnnotatorState state;
    std::vector<std::size_t> order;       ///< permutation of tuple indices
    std::size_t cursor = 0;               ///< next position to scan in order
    std::vector<std::size_t> gold_order;  ///< permutation of gold indices
    std::size_t gold_cursor = 0;
    std::size_t until_gold = 0;           ///< ordinary answers before the next gold
    std::optional<Question> pending;
    std::set<std::size_t> answered;
  };

  std::uint64_t annotator_seed(const std::string& id) const {
    return splitmix64(config_.seed ^ stable_hash(id));
  }

  // Gap before gold number k: the stride with up to +/- stride/2 jitter,
  // derived from (seed, annotator, k) so it never needs stored RNG state.
  std::size_t gold_gap(const std::string& id, std::size_t k) const {
    const std::size_t stride = gold_stride();
    if (stride == 0) return 0;
    const std::size_t jitter = stride / 2;
    Rng rng(splitmix64(annotator_seed(id) + 0x51ED27ULL * (k + 1)));
    return stride - jitter + uniform_index(rng, 2 * jitter + 1);
  }

  Annotator& annotator_entry(const std::string& id) {
    auto it = annotators_.find(id);
    if (it != annotators_.end()) return it->second;
    Annotator a;
    a.state.annotator_id = id;
    Rng rng(annotator_seed(id));
    a.order.resize(design_->tuples.size());
    for (std::size_t i = 0; i < a.order.size(); ++i) a.order[i] = i;
    shuffle(a.order, rng);
    a.gold_order.resize(gold_.size());
    for (std::size_t i = 0; i < a.gold_order.size(); ++i) a.gold_order[i] = i;
    shuffle(a.gold_order, rng);
    a.until_gold = gold_gap(id, 0);
    return annotators_.emplace(id, std::move(a)).first->second;
  }

  // (tuple, position in order) of the next tuple this annotator may take.
  std::optional<std::pair<std::size_t, std::size_t>> find_ordinary(const Annotator& a) const {
    for (std::size_t pos = a.cursor; pos < a.order.size(); ++pos) {
      const std::size_t t = a.order[pos];
      if (a.answered.count(t)) continue;
      if (accepted_[t] + reserved_[t] >= config_.per_tuple) continue;
      return std::make_pair(t, pos);
    }
    return std::nullopt;
  }

  void drop_pending(Annotator& a) {
    if (a.pending && !a.pending->gold) {
      --reserved_[a.pending->tuple_index];
      // Others may have scanned past the tuple while it was reserved.
      for (auto& [id, other] : annotators_) other.cursor = 0;
    }
    a.pending.reset();
  }

  void reject(const std::string& id, Annotator& a) {
    a.state.status = AnnotatorStatus::rejected;
    drop_pending(a);
    auto removed = std::remove_if(responses_.begin(), responses_.end(), [&](const Response& r) {
      if (r.annotator_id != id) return false;
      --accepted_[r.tuple_index];
      return true;
    });
    responses_.erase(removed, responses_.end());
    a.answered.clear();
    // Expunged tuples are pending again; let every stream rescan.
    for (auto& [other_id, other] : annotators_) other.cursor = 0;
  }

  std::shared_ptr<const TupleDesign> design_;
  std::vector<GoldQuestion> gold_;
  SessionConfig config_;
  std::map<std::string, Annotator> annotators_;
  std::vector<Response> responses_;
  std::vector<std::size_t> accepted_;
  std::vector<std::size_t> reserved_;
  std::uint64_t next_ordinal_ = 0;
};

// ---------------------------------------------------------------------------
// Persistence. The document mirrors the in-memory fields one to one.

inline nlohmann::json design_to_json(const TupleDesign& d) {
  nlohmann::json tuples = nlohmann::json::array();
  for (const auto& t : d.tuples) tuples.push_back({t[0], t[1], t[2], t[3]});
  return {{"items", d.items}, {"tuples", tuples}, {"seed", d.seed}};
}

inline TupleDesign design_from_json(const nlohmann::json& j) {
  TupleDesign d;
  d.items = j.at("items").get<std::vector<std::string>>();
  d.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("tuples")) {
    Tuple tp{};
    for (std::size_t k = 0; k < kTupleSize; ++k) {
      tp[k] = t.at(k).get<std::size_t>();
      if (tp[k] >= d.items.size()) throw ValidationError("persisted tuple references unknown item");
    }
    d.tuples.push_back(tp);
  }
  return d;
}

inline nlohmann::json gold_to_json(const std::vector<GoldQuestion>& gold) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : gold) {
    out.push_back({{"tuple_index", g.tuple_index}, {"best", g.acceptable_best}, {"worst", g.acceptable_worst}});
  }
  return out;
}

inline std::vector<GoldQuestion> gold_from_json(const nlohmann::json& j) {
  std::vector<GoldQuestion> out;
  for (const auto& g : j) {
    out.push_back({g.at("tuple_index").get<std::size_t>(), g.at("best").get<std::set<std::string>>(),
                   g.at("worst").get<std::set<std::string>>()});
  }
  return out;
}

inline nlohmann::json response_to_json(const Response& r) {
  return {{"annotator_id", r.annotator_id}, {"tuple_index", r.tuple_index}, {"best", r.best},
          {"worst", r.worst}, {"ordinal", r.ordinal}};
}

inline Response response_from_json(const nlohmann::json& j) {
  return {j.at("annotator_id").get<std::string>(), j.at("tuple_index").get<std::size_t>(),
          j.at("best").get<std::string>(), j.at("worst").get<std::string>(),
          j.value("ordinal", std::uint64_t{0})};
}

inline nlohmann::json config_to_json(const SessionConfig& c) {
  return {{"per_tuple", c.per_tuple},
          {"seed", c.seed},
          {"grace_golds", c.grace_golds},
          {"min_gold_accuracy", c.min_gold_accuracy},
          {"max_gold_fraction", c.max_gold_fraction}};
}

inline SessionConfig config_from_json(const nlohmann::json& j) {
  SessionConfig c;
  c.per_tuple = j.at("per_tuple").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.grace_golds = j.at("grace_golds").get<std::size_t>();
  c.min_gold_accuracy = j.at("min_gold_accuracy").get<double>();
  c.max_gold_fraction = j.at("max_gold_fraction").get<double>();
  return c;
}

inline nlohmann::json Session::to_json() const {
  nlohmann::json annotators = nlohmann::json::object();
  for (const auto& [id, a] : annotators_) {
    nlohmann::json pending = nullptr;
    if (a.pending) pending = {{"tuple_index", a.pending->tuple_index}, {"gold", a.pending->gold}};
    annotators[id] = {{"gold_seen", a.state.gold_seen},
                      {"gold_correct", a.state.gold_correct},
                      {"status", a.state.status == AnnotatorStatus::active ? "active" : "rejected"},
                      {"order", a.order},
                      {"cursor", a.cursor},
                      {"gold_order", a.gold_order},
                      {"gold_cursor", a.gold_cursor},
                      {"until_gold", a.until_gold},
                      {"pending", pending},
                      {"answered", a.answered}};
  }
  nlohmann::json responses = nlohmann::json::array();
  for (const auto& r : responses_) responses.push_back(response_to_json(r));
  return {{"design", design_to_json(*design_)},
          {"gold", gold_to_json(gold_)},
          {"config", config_to_json(config_)},
          {"annotators", annotators},
          {"responses", responses},
          {"accepted", accepted_},
          {"reserved", reserved_},
          {"next_ordinal", next_ordinal_}};
}

inline Session Session::from_json(const nlohmann::json& j) {
  Session s(std::make_shared<const TupleDesign>(design_from_json(j.at("design"))), gold_from_json(j.at("gold")),
            config_from_json(j.at("config")));
  for (const auto& [id, aj] : j.at("annotators").items()) {
    Annotator a;
    a.state.annotator_id = id;
    a.state.gold_seen = aj.at("gold_seen").get<std::size_t>();
    a.state.gold_correct = aj.at("gold_correct").get<std::size_t>();
    a.state.status = aj.at("status").get<std::string>() == "active" ? AnnotatorStatus::active : AnnotatorStatus::rejected;
    a.order = aj.at("order").get<std::vector<std::size_t>>();
    a.cursor = aj.at("cursor").get<std::size_t>();
    a.gold_order = aj.at("gold_order").get<std::vector<std::size_t>>();
    a.gold_cursor = aj.at("gold_cursor").get<std::size_t>();
    a.until_gold = aj.at("until_gold").get<std::size_t>();
    if (!aj.at("pending").is_null()) {
      a.pending = Question{aj["pending"].at("tuple_index").get<std::size_t>(), aj["pending"].at("gold").get<bool>()};
    }
    a.answered = aj.at("answered").get<std::set<std::size_t>>();
    s.annotators_.emplace(id, std::move(a));
  }
  for (const auto& r : j.at("responses")) s.responses_.push_back(response_from_json(r));
  s.accepted_ = j.at("accepted").get<std::vector<std::size_t>>();
  s.reserved_ = j.at("reserved").get<std::vector<std::size_t>>();
  s.next_ordinal_ = j.at("next_ordinal").get<std::uint64_t>();
  if (s.accepted_.size() != s.design_->tuples.size() || s.reserved_.size() != s.design_->tuples.size()) {
    throw ValidationError("persisted session counters do not match the design");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Simulated annotators.

namespace detail {

// True extremes of `latent` within a tuple. Ties: the lowest id wins best,
// the highest id wins worst.
inline std::pair<std::string, std::string> true_extremes(const std::array<std::string, kTupleSize>& ids,
                                                         const std::map<std::string, double>& latent) {
  auto value = [&](const std::string& id) {
    auto it = latent.find(id);
    if (it == latent.end()) throw ValidationError("no latent value for item " + id);
    return it->second;
  };
  std::string best = ids[0], worst = ids[0];
  for (const auto& id : ids) {
    const double v = value(id);
    const double vb = value(best);
    const double vw = value(worst);
    if (v > vb || (v == vb && id < best)) best = id;
    if (v < vw || (v == vw && id > worst)) worst = id;
  }
  return {best, worst};
}

}  // namespace detail

/// Simulated pool: annotator "sim-k" gives the k-th response to every tuple.
/// With probability accuracy_p the answer is the true extreme pair under
/// `latent`, otherwise a uniformly random (best, worst) pair of distinct items.
inline ResponseSet simulate_annotators(std::shared_ptr<const TupleDesign> design,
                                       const std::map<std::string, double>& latent, double accuracy_p,
                                       std::size_t per_tuple, std::uint64_t seed) {
  if (!(accuracy_p >= 0.0 && accuracy_p <= 1.0)) throw ValidationError("accuracy_p must lie in [0, 1]");
  if (per_tuple < 1) throw ValidationError("per_tuple must be at least 1");
  for (const auto& id : design->items) {
    if (!latent.count(id)) throw ValidationError("no latent value for item " + id);
  }
  Rng rng(splitmix64(seed));
  ResponseSet rs{design, {}, per_tuple};
  rs.responses.reserve(design->tuples.size() * per_tuple);
  std::uint64_t ordinal = 0;
  for (std::size_t t = 0; t < design->tuples.size(); ++t) {
    const auto ids = design->tuple_ids(t);
    const auto truth = detail::true_extremes(ids, latent);
    for (std::size_t k = 0; k < per_tuple; ++k) {
      Response r{"sim-" + std::to_string(k), t, truth.first, truth.second, ordinal++};
      if (uniform_real(rng) >= accuracy_p) {
        const std::size_t b = uniform_index(rng, kTupleSize);
        std::size_t w = uniform_index(rng, kTupleSize - 1);
        if (w >= b) ++w;
        r.best = ids[b];
        r.worst = ids[w];
      }
      rs.responses.push_back(std::move(r));
    }
  }
  return rs;
}

}  // namespace bws
