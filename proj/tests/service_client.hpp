#pragma once

// Scripted annotation client driving the Api in-process, shared by the
// service tests and the acceptance run.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bws/service.hpp"

namespace bws::testing {

inline std::string fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bws_svc_" + name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

/// 25 items t00..t24 with latent value equal to their index, a design, three
/// golds answered by the true extremes, and texts.
struct StudyFixture {
  Study study;
  std::map<std::string, double> latent;
};

inline StudyFixture small_study(std::uint64_t seed = 5, std::size_t items = 25, std::size_t golds = 3) {
  StudyFixture f;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < items; ++i) {
    ids.push_back((i < 10 ? "t0" : "t") + std::to_string(i));
    f.latent[ids.back()] = static_cast<double>(i);
    f.study.texts[ids.back()] = "speaker text " + std::to_string(i);
  }
  f.study.design = std::make_shared<const TupleDesign>(generate_design(ids, seed));
  const std::size_t tuples = f.study.design->tuples.size();
  for (std::size_t k = 0; k < golds; ++k) {
    const std::size_t t = (2 * k + 1) * tuples / (2 * golds);
    const auto [b, w] = detail::true_extremes(f.study.design->tuple_ids(t), f.latent);
    f.study.gold.push_back({t, {b}, {w}});
  }
  f.study.emotion = Emotion::fear;
  return f;
}

inline nlohmann::json call(Api& api, std::string_view method, const std::string& path,
                           const std::map<std::string, std::string>& query = {}, const std::string& body = "",
                           int* status = nullptr) {
  const auto r = api.handle(method, path, query, body);
  if (status) *status = r.status;
  return nlohmann::json::parse(r.body);
}

/// Annotators take turns fetching and answering. Answers follow the latent
/// order, except that with probability `noise` an answer is a random distinct
/// pair, so noisy annotators may fail gold questions and be rejected. Stops
/// after `max_steps` submissions, when the session is complete, or when no
/// active annotator can get a question. Returns the accepted responses of
/// annotators still active, in submission order, as the client saw them.
inline std::vector<Response> drive(Api& api, const std::string& session, const StudyFixture& f,
                                   const std::vector<std::string>& annotators, double noise, std::uint64_t seed,
                                   std::size_t max_steps = static_cast<std::size_t>(-1)) {
  Rng rng(seed);
  std::vector<Response> accepted;
  std::set<std::string> rejected;
  const std::string base = "/api/v1/sessions/" + session;
  std::size_t steps = 0, idle = 0;
  std::uint64_t ordinal = 0;
  for (std::size_t turn = 0; steps < max_steps && idle < annotators.size(); ++turn) {
    const auto& who = annotators[turn % annotators.size()];
    if (rejected.count(who)) {
      ++idle;
      continue;
    }
    int status = 0;
    const auto next = call(api, "GET", base + "/next", {{"annotator", who}}, "", &status);
    if (status == 403) {
      rejected.insert(who);
      continue;
    }
    if (status != 200) throw std::runtime_error("next failed: " + next.dump());
    if (next["question"].is_null()) {
      if (next["status"] == "complete") break;
      ++idle;
      continue;
    }
    idle = 0;
    const auto& q = next["question"];
    std::array<std::string, kTupleSize> ids;
    for (std::size_t k = 0; k < kTupleSize; ++k) ids[k] = q["speakers"][k]["id"].get<std::string>();
    auto [best, worst] = detail::true_extremes(ids, f.latent);
    if (uniform_real(rng) < noise) {
      const std::size_t b = uniform_index(rng, ids.size());
      std::size_t w = uniform_index(rng, ids.size() - 1);
      if (w >= b) ++w;
      best = ids[b];
      worst = ids[w];
    }
    const std::size_t tuple = q["tuple_index"].get<std::size_t>();
    const nlohmann::json body = {{"annotator", who}, {"tuple_index", tuple}, {"best", best}, {"worst", worst}};
    const auto out = call(api, "POST", base + "/responses", {}, body.dump(), &status);
    if (status != 200) throw std::runtime_error("submit failed: " + out.dump());
    if (out["outcome"] == "accepted") {
      accepted.push_back(Response{who, tuple, best, worst, ordinal++});
    } else if (out["outcome"] == "rejected") {
      rejected.insert(who);
      std::erase_if(accepted, [&](const Response& r) { return r.annotator_id == who; });
    }
    ++steps;
  }
  return accepted;
}

}  // namespace bws::testing
