#pragma once

// Annotation service: a persistent session store and a transport-independent
// request handler. Wire bodies are JSON; every body carries "protocol".
//
// Endpoints (all under /api/v1):
//   GET  /version
//   POST /sessions                          body: {"seed"?, "per_tuple"?}
//   GET  /sessions/{id}/next?annotator=A
//   POST /sessions/{id}/responses           body: {"annotator", "tuple_index", "best", "worst"}
//   GET  /sessions/{id}/progress[?annotator=A]
//   GET  /sessions/{id}/export[?format=tsv]

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "bws/annotation.hpp"
#include "bws/corpus.hpp"
#include "bws/design.hpp"
#include "json.hpp"

namespace bws {

inline constexpr int kProtocolVersion = 1;

inline std::string_view emotion_adjective(Emotion e) {
  switch (e) {
    case Emotion::anger: return "angry";
    case Emotion::fear: return "fearful";
    case Emotion::joy: return "joyful";
    case Emotion::sadness: return "sad";
  }
  return "";
}

inline std::string most_prompt(Emotion e) {
  return "Which of the four speakers is likely to be the MOST " + std::string(emotion_adjective(e)) + "?";
}
inline std::string least_prompt(Emotion e) {
  return "Which of the four speakers is likely to be the LEAST " + std::string(emotion_adjective(e)) + "?";
}

/// What a session annotates: the design, gold questions, the text shown for
/// every item, and the emotion named in the prompt.
struct Study {
  std::shared_ptr<const TupleDesign> design;
  std::vector<GoldQuestion> gold;
  std::map<std::string, std::string> texts;
  Emotion emotion = Emotion::fear;

  void validate() const {
    if (!design) throw ValidationError("study has no design");
    for (const auto& id : design->items) {
      if (!texts.count(id)) throw ValidationError("no text for design item " + id);
    }
  }
};

class UnknownSession : public Error {
 public:
  explicit UnknownSession(const std::string& id) : Error("unknown session " + id) {}
};

/// Sessions persisted as append-only JSON-lines event logs, one file per
/// session, replayed on construction. Mutations of one session are
/// serialized; reads of a session may run concurrently.
class SessionStore {
 public:
  explicit SessionStore(std::string directory) : dir_(std::move(directory)) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (!fs::is_directory(dir_)) throw ResourceError("cannot create storage directory " + dir_);
    std::vector<fs::path> logs;
    for (const auto& entry : fs::directory_iterator(dir_)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    for (const auto& p : logs) replay(p);
  }

  /// Storage directory from BWS_STORAGE_DIR, else `fallback`.
  static std::string storage_dir_from_env(const std::string& fallback) {
    const char* env = std::getenv("BWS_STORAGE_DIR");
    return env && *env ? std::string(env) : fallback;
  }

  const std::string& directory() const { return dir_; }

  std::string create(const Study& study, const SessionConfig& config) {
    study.validate();
    auto entry = std::make_shared<Entry>(Session(study.design, study.gold, config), study);
    std::unique_lock lock(map_mutex_);
    const std::string id = make_id(next_id_++);
    entry->log_path = (std::filesystem::path(dir_) / (id + ".jsonl")).string();
    nlohmann::json ev = {{"event", "create"},
                         {"session_id", id},
                         {"session", entry->session.to_json()},
                         {"texts", study.texts},
                         {"emotion", std::string(to_string(study.emotion))}};
    append(entry->log_path, ev);
    sessions_.emplace(id, entry);
    return id;
  }

  std::vector<std::string> ids() const {
    std::shared_lock lock(map_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, e] : sessions_) out.push_back(id);
    return out;
  }

  std::optional<Question> next(const std::string& id, const std::string& annotator) {
    auto e = find(id);
    std::unique_lock lock(e->mutex);
    auto q = e->session.next_question(annotator);
    append(e->log_path, {{"event", "next"}, {"annotator", annotator}});
    return q;
  }

  SubmitOutcome submit(const std::string& id, const Response& r) {
    auto e = find(id);
    std::unique_lock lock(e->mutex);
    const auto outcome = e->session.submit(r);
    append(e->log_path, {{"event", "submit"}, {"response", response_to_json(r)}});
    return outcome;
  }

  /// Runs `f(const Session&, const Study&)` under a shared lock.
  template <typename F>
  auto read(const std::string& id, F&& f) const {
    auto e = find(id);
    std::shared_lock lock(e->mutex);
    return f(static_cast<const Session&>(e->session), static_cast<const Study&>(e->study));
  }

 private:
  struct Entry {
    Entry(Session s, Study st) : session(std::move(s)), study(std::move(st)) {}
    mutable std::shared_mutex mutex;
    Session session;
    Study study;
    std::string log_path;
  };

  static std::string make_id(std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06zu", n);
    return buf;
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownSession(id);
    return it->second;
  }

  // One line per event, flushed and synced before the caller sees success.
  static void append(const std::string& path, const nlohmann::json& event) {
    const std::string line = event.dump() + '\n';
    std::FILE* f = std::fopen(path.c_str(), "ab");
    if (!f) throw ResourceError("cannot open session log " + path);
    const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fflush(f) == 0 &&
                    ::fsync(::fileno(f)) == 0;
    std::fclose(f);
    if (!ok) throw ResourceError("cannot write session log " + path);
  }

  void replay(const std::filesystem::path& path) {
    const std::string text = read_file(path.string());
    const auto lines = lines_of(text);
    std::shared_ptr<Entry> entry;
    std::string id;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
      if (trim(lines[ln]).empty()) continue;
      nlohmann::json ev;
      try {
        ev = nlohmann::json::parse(lines[ln]);
      } catch (const nlohmann::json::exception&) {
        // A torn final line is an event that never completed.
        if (ln + 1 == lines.size() && !text.empty() && text.back() != '\n') {
          std::filesystem::resize_file(path, text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1);
          break;
        }
        throw ResourceError(path.string() + ":" + std::to_string(ln + 1) + ": corrupt session log");
      }
      try {
        const auto kind = ev.at("event").get<std::string>();
        if (kind == "create") {
          if (entry) throw ResourceError("second create event");
          id = ev.at("session_id").get<std::string>();
          Session s = Session::from_json(ev.at("session"));
          Study st;
          st.design = s.design_ptr();
          st.gold = s.gold();
          st.texts = ev.at("texts").get<std::map<std::string, std::string>>();
          auto emotion = parse_emotion(ev.at("emotion").get<std::string>());
          if (!emotion) throw ResourceError("unknown emotion in session log");
          st.emotion = *emotion;
          entry = std::make_shared<Entry>(std::move(s), std::move(st));
          entry->log_path = path.string();
        } else if (!entry) {
          throw ResourceError("event before create");
        } else if (kind == "next") {
          entry->session.next_question(ev.at("annotator").get<std::string>());
        } else if (kind == "submit") {
          entry->session.submit(response_from_json(ev.at("response")));
        } else {
          throw ResourceError("unknown event '" + kind + "'");
        }
      } catch (const ResourceError& e) {
        throw ResourceError(path.string() + ":" + std::to_string(ln + 1) + ": " + e.what());
      } catch (const std::exception& e) {
        throw ResourceError(path.string() + ":" + std::to_string(ln + 1) + ": cannot replay event: " + e.what());
      }
    }
    if (!entry) return;
    if (!text.empty() && text.back() != '\n' && std::filesystem::file_size(path) == text.size()) {
      // Complete final event missing its newline: terminate it before appending more.
      std::FILE* f = std::fopen(path.c_str(), "ab");
      if (!f) throw ResourceError("cannot open session log " + path.string());
      std::fputc('\n', f);
      std::fclose(f);
    }
    if (id.size() > 1 && id[0] == 's') {
      if (auto n = parse_int(std::string_view(id).substr(1)); n && *n >= 0) {
        next_id_ = std::max(next_id_, static_cast<std::size_t>(*n) + 1);
      }
    }
    sessions_.emplace(id, entry);
  }

  std::string dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t next_id_ = 1;
};

// ---------------------------------------------------------------------------
// Request handling.

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Maps requests to store operations. New sessions use `study` and
/// `defaults`, with seed and per_tuple overridable per request.
class Api {
 public:
  Api(SessionStore& store, Study study, SessionConfig defaults)
      : store_(store), study_(std::move(study)), defaults_(defaults) {
    study_.validate();
  }

  ApiResponse handle(std::string_view method, std::string_view path,
                     const std::map<std::string, std::string>& query, std::string_view body) {
    try {
      return route(method, path, query, body);
    } catch (const UnknownSession& e) {
      return error(404, "unknown_session", e.what());
    } catch (const UnknownAnnotator& e) {
      return error(404, "unknown_annotator", e.what());
    } catch (const AnnotatorRejected& e) {
      return error(403, "annotator_rejected", e.what());
    } catch (const NotAssigned& e) {
      return error(409, "not_assigned", e.what());
    } catch (const ValidationError& e) {
      return error(400, "bad_request", e.what());
    } catch (const nlohmann::json::exception& e) {
      return error(400, "bad_request", std::string("malformed body: ") + e.what());
    } catch (const std::exception& e) {
      return error(500, "internal", e.what());
    }
  }

 private:
  static ApiResponse json_response(int status, nlohmann::json body) {
    body["protocol"] = kProtocolVersion;
    return {status, body.dump(), "application/json"};
  }

  static ApiResponse error(int status, const std::string& code, const std::string& message) {
    return json_response(status, {{"error", code}, {"message", message}});
  }

  static std::vector<std::string_view> segments(std::string_view path) {
    std::vector<std::string_view> out;
    for (auto s : split(path, '/')) {
      if (!s.empty()) out.push_back(s);
    }
    return out;
  }

  static nlohmann::json parse_body(std::string_view body) {
    if (trim(body).empty()) return nlohmann::json::object();
    auto j = nlohmann::json::parse(body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
  }

  static std::string required_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw ValidationError(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
  }

  static std::string query_param(const std::map<std::string, std::string>& q, const std::string& key) {
    auto it = q.find(key);
    if (it == q.end() || it->second.empty()) throw ValidationError("missing query parameter '" + key + "'");
    return it->second;
  }

  ApiResponse route(std::string_view method, std::string_view path, const std::map<std::string, std::string>& query,
                    std::string_view body) {
    const auto seg = segments(path);
    if (seg.size() < 3 || seg[0] != "api" || seg[1] != "v1") return error(404, "not_found", "no such endpoint");
    if (seg.size() == 3 && seg[2] == "version") {
      if (method != "GET") return error(405, "method_not_allowed", "use GET");
      return json_response(200, {{"service", "bws-annotation"}});
    }
    if (seg[2] != "sessions") return error(404, "not_found", "no such endpoint");
    if (seg.size() == 3) {
      if (method != "POST") return error(405, "method_not_allowed", "use POST");
      return create_session(parse_body(body));
    }
    const std::string id(seg[3]);
    if (seg.size() != 5) return error(404, "not_found", "no such endpoint");
    const auto action = seg[4];
    if (action == "next" && method == "GET") return next(id, query_param(query, "annotator"));
    if (action == "responses" && method == "POST") return submit(id, parse_body(body));
    if (action == "progress" && method == "GET") return progress(id, query);
    if (action == "export" && method == "GET") return export_responses(id, query);
    return error(404, "not_found", "no such endpoint");
  }

  ApiResponse create_session(const nlohmann::json& body) {
    SessionConfig c = defaults_;
    if (body.contains("seed")) {
      if (!body["seed"].is_number_unsigned()) throw ValidationError("seed must be a non-negative integer");
      c.seed = body["seed"].get<std::uint64_t>();
    }
    if (body.contains("per_tuple")) {
      if (!body["per_tuple"].is_number_unsigned()) throw ValidationError("per_tuple must be a positive integer");
      c.per_tuple = body["per_tuple"].get<std::size_t>();
    }
    const auto id = store_.create(study_, c);
    return json_response(201, {{"session_id", id}, {"tuples", study_.design->tuples.size()}, {"per_tuple", c.per_tuple}});
  }

  ApiResponse next(const std::string& id, const std::string& annotator) {
    const auto q = store_.next(id, annotator);
    return store_.read(id, [&](const Session& s, const Study& st) {
      nlohmann::json out = {{"session_id", id}, {"annotator", annotator}};
      if (!q) {
        out["question"] = nullptr;
        out["status"] = s.complete() ? "complete" : "waiting";
        return json_response(200, out);
      }
      nlohmann::json speakers = nlohmann::json::array();
      for (const auto& item : s.design().tuple_ids(q->tuple_index)) {
        speakers.push_back({{"id", item}, {"text", st.texts.at(item)}});
      }
      const auto& a = s.annotator(annotator);
      out["status"] = "question";
      out["question"] = {{"tuple_index", q->tuple_index},
                         {"emotion", std::string(to_string(st.emotion))},
                         {"prompt_most", most_prompt(st.emotion)},
                         {"prompt_least", least_prompt(st.emotion)},
                         {"speakers", speakers}};
      out["progress"] = {{"answered", a.gold_seen + count_answered(s, annotator)}};
      return json_response(200, out);
    });
  }

  static std::size_t count_answered(const Session& s, const std::string& annotator) {
    return static_cast<std::size_t>(std::count_if(s.responses().begin(), s.responses().end(),
                                                  [&](const Response& r) { return r.annotator_id == annotator; }));
  }

  ApiResponse submit(const std::string& id, const nlohmann::json& body) {
    Response r;
    r.annotator_id = required_string(body, "annotator");
    if (!body.contains("tuple_index") || !body["tuple_index"].is_number_unsigned()) {
      throw ValidationError("missing non-negative integer field 'tuple_index'");
    }
    r.tuple_index = body["tuple_index"].get<std::size_t>();
    r.best = required_string(body, "best");
    r.worst = required_string(body, "worst");
    const auto outcome = store_.submit(id, r);
    nlohmann::json out = {{"session_id", id}, {"annotator", r.annotator_id}};
    switch (outcome.kind) {
      case SubmitOutcome::Kind::accepted:
        out["outcome"] = "accepted";
        break;
      case SubmitOutcome::Kind::gold_feedback:
        out["outcome"] = "gold_feedback";
        out["correct"] = outcome.correct;
        break;
      case SubmitOutcome::Kind::rejected_annotator:
        out["outcome"] = "rejected";
        out["correct"] = outcome.correct;
        out["message"] = AnnotatorRejected(r.annotator_id).what();
        break;
    }
    return json_response(200, out);
  }

  ApiResponse progress(const std::string& id, const std::map<std::string, std::string>& query) {
    return store_.read(id, [&](const Session& s, const Study&) {
      const auto p = s.progress();
      nlohmann::json out = {{"session_id", id},
                            {"total_tuples", p.total_tuples},
                            {"completed_tuples", p.completed_tuples},
                            {"responses", p.responses},
                            {"expected_responses", p.expected_responses},
                            {"active_annotators", p.active_annotators},
                            {"rejected_annotators", p.rejected_annotators},
                            {"complete", p.complete}};
      if (auto it = query.find("annotator"); it != query.end()) {
        const auto& a = s.annotator(it->second);
        out["annotator"] = {{"id", a.annotator_id},
                            {"status", a.status == AnnotatorStatus::active ? "active" : "rejected"},
                            {"gold_seen", a.gold_seen},
                            {"gold_correct", a.gold_correct},
                            {"answered", count_answered(s, it->second)}};
      }
      return json_response(200, out);
    });
  }

  ApiResponse export_responses(const std::string& id, const std::map<std::string, std::string>& query) {
    return store_.read(id, [&](const Session& s, const Study&) {
      const auto rs = s.response_set();
      if (auto it = query.find("format"); it != query.end() && it->second == "tsv") {
        return ApiResponse{200, serialize_responses(rs), "text/tab-separated-values"};
      }
      nlohmann::json responses = nlohmann::json::array();
      for (const auto& r : rs.responses) responses.push_back(response_to_json(r));
      return json_response(200, {{"session_id", id},
                                 {"per_tuple", rs.per_tuple},
                                 {"design_tsv", serialize_design(s.design())},
                                 {"responses", responses}});
    });
  }

  SessionStore& store_;
  Study study_;
  SessionConfig defaults_;
};

}  // namespace bws
