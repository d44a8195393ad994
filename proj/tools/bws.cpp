// bws: command-line entry point for every pipeline stage.
//
// Exit status: 0 success, 1 invalid input or failed operation, 2 usage error.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bws/annotation.hpp"
#include "bws/corpus.hpp"
#include "bws/design.hpp"
#include "bws/experiments.hpp"
#include "bws/features.hpp"
#include "bws/http.hpp"
#include "bws/regression.hpp"
#include "bws/scoring.hpp"
#include "bws/service.hpp"

namespace {

using namespace bws;

struct Common {
  std::uint64_t seed = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed (default 0)");
  cmd->add_option("--out", c.out, "Output file (default: standard output)");
}

void emit(const Common& c, const std::string& content) {
  if (c.out.empty() || c.out == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_file(c.out, content);
  }
}

// One id per line (first tab-separated column); blank and '#' lines skipped.
std::vector<std::string> read_id_list(const std::string& path) {
  const auto text = read_file(path);
  std::vector<std::string> ids;
  for (auto line : lines_of(text)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    ids.emplace_back(trim(split(t, '\t')[0]));
  }
  return ids;
}

std::map<std::string, double> read_latent(const std::string& path) {
  const auto text = read_file(path);
  std::map<std::string, double> latent;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto t = trim(lines[ln]);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = split(t, '\t');
    if (cols.size() != 2) throw ParseError("expected id<TAB>value", ln + 1);
    auto v = parse_double(cols[1]);
    if (!v) throw ParseError("malformed latent value", ln + 1);
    if (!latent.emplace(std::string(trim(cols[0])), *v).second) throw ParseError("duplicate id", ln + 1);
  }
  return latent;
}

Dataset read_dataset(const std::string& path, const std::string& format) {
  if (format == "scored") return load_dataset(path, DatasetFormat::scored_tsv);
  if (format == "raw") return load_dataset(path, DatasetFormat::raw_tsv);
  if (format == "release") return parse_release(read_file(path), Partition::unassigned);
  throw ValidationError("unknown dataset format '" + format + "' (scored, raw or release)");
}

struct ResourceFlags {
  std::string config = "WN";
  std::vector<std::string> lexicons;
  std::string embeddings;
  std::string negators;
};

void add_resource_flags(CLI::App* cmd, ResourceFlags& r) {
  cmd->add_option("--config", r.config, "Feature sets joined by '+': WN, CN, WE, L, L=<name>");
  cmd->add_option("--lexicon", r.lexicons, "Lexicon TSV file (repeatable)");
  cmd->add_option("--embeddings", r.embeddings, "Word embedding text file");
  cmd->add_option("--negators", r.negators, "Negator word list (default: built-in list)");
}

FeatureResources load_resources(const ResourceFlags& r, const std::set<std::string>& vocabulary) {
  FeatureResources res;
  for (const auto& path : r.lexicons) {
    auto lex = load_lexicon(path);
    const auto name = lex.name;
    if (!res.lexicons.emplace(name, std::move(lex)).second) throw ResourceError("duplicate lexicon name " + name);
  }
  if (!r.embeddings.empty()) {
    res.embeddings = std::make_shared<const EmbeddingTable>(load_embeddings(r.embeddings, &vocabulary));
  }
  if (!r.negators.empty()) res.negators = parse_negators(read_file(r.negators));
  return res;
}

std::vector<Example> examples_of(const Dataset& ds, const FeatureConfig& config, const FeatureResources& res) {
  FeatureCache cache(res);
  std::vector<Item> items;
  for (const auto& item : ds.items) {
    if (item.gold_score) items.push_back(item);
  }
  return cache.examples(items, config);
}

ExperimentData load_experiment_data(const std::string& dir) {
  ExperimentData data;
  for (auto e : kEmotions) {
    auto ds = load_release_dir(dir, e);
    if (ds) data.emplace(e, split_by_partition(*ds));
  }
  if (data.empty()) throw ResourceError("no <emotion>-ratings-0to1.{train,dev,test} files found in " + dir);
  return data;
}

FeatureResources load_experiment_resources(const std::string& dir, const ExperimentData& data,
                                           const std::string& negators) {
  std::set<std::string> vocab;
  for (const auto& [e, split] : data) {
    for (const auto* part : {&split.train, &split.test}) {
      for (const auto& item : *part) {
        for (const auto& t : tokenize(item.text)) vocab.insert(t.surface);
      }
    }
  }
  auto res = load_resource_dir(dir, vocab);
  if (!negators.empty()) res.negators = parse_negators(read_file(negators));
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best-Worst Scaling annotation and emotion-intensity toolkit"};
  app.require_subcommand(1);

  // design
  Common design_c;
  std::string design_items;
  std::size_t restart_budget = DesignOptions{}.restart_budget;
  auto* design = app.add_subcommand("design", "Generate 2N 4-tuples from N item ids");
  add_common(design, design_c);
  design->add_option("--items", design_items, "Item id list, one per line")->required();
  design->add_option("--restart-budget", restart_budget, "Search restarts before giving up");

  // score
  Common score_c;
  std::string score_responses, score_tuples;
  auto* score = app.add_subcommand("score", "Best-minus-worst scores from responses");
  add_common(score, score_c);
  score->add_option("--responses", score_responses, "Response TSV")->required();
  score->add_option("--tuples", score_tuples, "Tuple file")->required();

  // shr
  Common shr_c;
  std::string shr_responses, shr_tuples, shr_weighting = "per_tuple";
  std::size_t shr_reps = 100;
  auto* shr = app.add_subcommand("shr", "Split-half reliability");
  add_common(shr, shr_c);
  shr->add_option("--responses", shr_responses, "Response TSV")->required();
  shr->add_option("--tuples", shr_tuples, "Tuple file")->required();
  shr->add_option("--repetitions", shr_reps, "Random splits to average (default 100)");
  shr->add_option("--weighting", shr_weighting, "per_tuple or per_judgment")
      ->check(CLI::IsMember({"per_tuple", "per_judgment"}));

  // hashtag-impact
  Common hi_c;
  std::string hi_dataset, hi_scatter, hi_format = "text";
  auto* hi = app.add_subcommand("hashtag-impact", "Score change when the trailing emotion hashtag is removed");
  add_common(hi, hi_c);
  hi->add_option("--dataset", hi_dataset, "Scored dataset TSV with HQT/NQT pairs")->required();
  hi->add_option("--scatter", hi_scatter, "Also write the per-pair scatter table here");
  hi->add_option("--format", hi_format, "text or kv")->check(CLI::IsMember({"text", "kv"}));

  // simulate
  Common sim_c;
  std::string sim_tuples, sim_latent;
  double sim_accuracy = 0.8;
  std::size_t sim_per_tuple = 3;
  auto* sim = app.add_subcommand("simulate", "Simulated annotator responses from latent scores");
  add_common(sim, sim_c);
  sim->add_option("--tuples", sim_tuples, "Tuple file")->required();
  sim->add_option("--latent", sim_latent, "Latent values, id<TAB>value per line")->required();
  sim->add_option("--accuracy", sim_accuracy, "Probability of answering with the true extremes");
  sim->add_option("--per-tuple", sim_per_tuple, "Responses per tuple (default 3)");

  // features
  Common feat_c;
  ResourceFlags feat_r;
  std::string feat_dataset, feat_format = "scored";
  auto* feat = app.add_subcommand("features", "Feature vectors for dataset items");
  add_common(feat, feat_c);
  add_resource_flags(feat, feat_r);
  feat->add_option("--dataset", feat_dataset, "Dataset file")->required();
  feat->add_option("--format", feat_format, "scored, raw or release");

  // train
  Common train_c;
  ResourceFlags train_r;
  std::vector<std::string> train_files;
  std::string train_format = "release";
  Hyperparams hp;
  auto* trn = app.add_subcommand("train", "Fit the intensity regressor");
  add_common(trn, train_c);
  add_resource_flags(trn, train_r);
  trn->add_option("--data", train_files, "Training dataset file (repeatable; e.g. train and dev)")->required();
  trn->add_option("--format", train_format, "scored, raw or release");
  trn->add_option("--C", hp.C, "Regularization parameter (default 1)");
  trn->add_option("--epsilon", hp.epsilon, "Insensitivity margin (default 0.1)");

  // eval
  Common eval_c;
  ResourceFlags eval_r;
  std::string eval_model, eval_test, eval_format = "release";
  std::optional<double> eval_threshold;
  auto* evl = app.add_subcommand("eval", "Correlate model predictions with gold scores");
  add_common(evl, eval_c);
  add_resource_flags(evl, eval_r);
  evl->add_option("--model", eval_model, "Model file")->required();
  evl->add_option("--test", eval_test, "Test dataset file")->required();
  evl->add_option("--format", eval_format, "scored, raw or release");
  evl->add_option("--threshold", eval_threshold, "Only items with gold >= threshold");

  // ablate
  Common abl_c;
  std::string abl_dir, abl_flat, abl_negators;
  std::vector<std::string> abl_configs;
  std::optional<double> abl_threshold;
  auto* abl = app.add_subcommand("ablate", "Feature ablation grid over a release directory");
  add_common(abl, abl_c);
  abl->add_option("--data-dir", abl_dir, "Release files plus embeddings.txt and lexicons/")->required();
  abl->add_option("--configs", abl_configs, "Feature configurations (repeatable)")->required();
  abl->add_option("--flat", abl_flat, "Also write the flat full-precision table here");
  abl->add_option("--threshold", abl_threshold, "Evaluate only test items with gold >= threshold");
  abl->add_option("--negators", abl_negators, "Negator word list");

  // transfer
  Common tr_c;
  std::string tr_dir, tr_flat, tr_config = "WN+WE+L", tr_negators;
  std::vector<std::string> tr_pooled;
  auto* tr = app.add_subcommand("transfer", "Cross-emotion transfer matrix");
  add_common(tr, tr_c);
  tr->add_option("--data-dir", tr_dir, "Release files plus embeddings.txt and lexicons/")->required();
  tr->add_option("--config", tr_config, "Feature configuration (default WN+WE+L)");
  tr->add_option("--flat", tr_flat, "Also write the flat full-precision table here");
  tr->add_option("--pooled", tr_pooled, "Pooled run as train1+train2:test, e.g. fear+sadness:sadness (repeatable)");
  tr->add_option("--negators", tr_negators, "Negator word list");

  // serve
  Common srv_c;
  std::string srv_tuples, srv_gold, srv_items, srv_items_format = "scored", srv_emotion = "fear",
                                                srv_host = "127.0.0.1", srv_storage;
  int srv_port = 8080;
  std::size_t srv_per_tuple = 3;
  auto* srv = app.add_subcommand("serve", "HTTP annotation service");
  add_common(srv, srv_c);
  srv->add_option("--tuples", srv_tuples, "Tuple file")->required();
  srv->add_option("--gold", srv_gold, "Gold question TSV");
  srv->add_option("--items", srv_items, "Dataset with the texts of the design items")->required();
  srv->add_option("--items-format", srv_items_format, "scored, raw or release");
  srv->add_option("--emotion", srv_emotion, "Emotion named in the prompt")
      ->check(CLI::IsMember({"anger", "fear", "joy", "sadness"}));
  srv->add_option("--host", srv_host, "Listen address (default 127.0.0.1)");
  srv->add_option("--port", srv_port, "Listen port (default 8080)");
  srv->add_option("--per-tuple", srv_per_tuple, "Responses per tuple (default 3)");
  srv->add_option("--storage", srv_storage, "Session log directory (default $BWS_STORAGE_DIR or ./bws-sessions)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return 2;
  }

  try {
    if (*design) {
      const auto ids = read_id_list(design_items);
      DesignOptions opt;
      opt.restart_budget = restart_budget;
      emit(design_c, serialize_design(generate_design(ids, design_c.seed, opt)));
    } else if (*score) {
      auto d = std::make_shared<const TupleDesign>(load_design(score_tuples));
      emit(score_c, serialize_scores(compute_scores(parse_responses(read_file(score_responses), d))));
    } else if (*shr) {
      auto d = std::make_shared<const TupleDesign>(load_design(shr_tuples));
      ShrOptions opt;
      opt.repetitions = shr_reps;
      opt.seed = shr_c.seed;
      opt.weighting = shr_weighting == "per_judgment" ? ShrWeighting::per_judgment : ShrWeighting::per_tuple;
      const auto r = split_half_reliability(parse_responses(read_file(shr_responses), d), opt);
      emit(shr_c, "repetitions\t" + std::to_string(r.repetitions) + "\npearson\t" + format_double(r.mean_pearson) +
                      "\nspearman\t" + format_double(r.mean_spearman) + "\n");
    } else if (*hi) {
      const auto ds = load_dataset(hi_dataset, DatasetFormat::scored_tsv);
      const auto pairs = hqt_nqt_pairs(ds);
      const auto report = hashtag_impact(pairs);
      emit(hi_c, hi_format == "kv" ? format_report_kv(report) : format_report_text(report));
      if (!hi_scatter.empty()) write_file(hi_scatter, format_scatter(hashtag_scatter(pairs)));
    } else if (*sim) {
      auto d = std::make_shared<const TupleDesign>(load_design(sim_tuples));
      const auto rs = simulate_annotators(d, read_latent(sim_latent), sim_accuracy, sim_per_tuple, sim_c.seed);
      emit(sim_c, serialize_responses(rs));
    } else if (*feat) {
      const auto ds = read_dataset(feat_dataset, feat_format);
      std::set<std::string> vocab;
      for (const auto& item : ds.items) {
        for (const auto& t : tokenize(item.text)) vocab.insert(t.surface);
      }
      const auto res = load_resources(feat_r, vocab);
      const auto config = FeatureConfig::parse(feat_r.config, res.lexicon_names());
      std::string out;
      for (const auto& item : ds.items) {
        for (const auto& [k, v] : assemble(item.text, config, res)) out += item.id + '\t' + k + '\t' + format_double(v) + '\n';
      }
      emit(feat_c, out);
    } else if (*trn) {
      std::vector<Dataset> parts;
      for (const auto& f : train_files) parts.push_back(read_dataset(f, train_format));
      const auto ds = merge_datasets(parts);
      std::set<std::string> vocab;
      for (const auto& item : ds.items) {
        for (const auto& t : tokenize(item.text)) vocab.insert(t.surface);
      }
      const auto res = load_resources(train_r, vocab);
      const auto config = FeatureConfig::parse(train_r.config, res.lexicon_names());
      emit(train_c, serialize_model(train(examples_of(ds, config, res), hp)));
    } else if (*evl) {
      const auto ds = read_dataset(eval_test, eval_format);
      std::set<std::string> vocab;
      for (const auto& item : ds.items) {
        for (const auto& t : tokenize(item.text)) vocab.insert(t.surface);
      }
      const auto res = load_resources(eval_r, vocab);
      const auto config = FeatureConfig::parse(eval_r.config, res.lexicon_names());
      const auto model = load_model(eval_model);
      const auto ex = examples_of(ds, config, res);
      const auto r = eval_threshold ? evaluate_subset(model, ex, *eval_threshold) : evaluate(model, ex);
      emit(eval_c, "pearson\t" + format_double(r.pearson) + "\nspearman\t" + format_double(r.spearman) + "\nn\t" +
                       std::to_string(r.n) + "\n");
    } else if (*abl) {
      const auto data = load_experiment_data(abl_dir);
      const auto res = load_experiment_resources(abl_dir, data, abl_negators);
      std::vector<NamedConfig> configs;
      for (const auto& c : abl_configs) configs.push_back({c, FeatureConfig::parse(c, res.lexicon_names())});
      const auto table = ablation_run(data, configs, res, {}, abl_threshold);
      emit(abl_c, format_ablation_grid(table));
      if (!abl_flat.empty()) write_file(abl_flat, format_ablation_flat(table));
    } else if (*tr) {
      const auto data = load_experiment_data(tr_dir);
      const auto res = load_experiment_resources(tr_dir, data, tr_negators);
      const auto config = FeatureConfig::parse(tr_config, res.lexicon_names());
      const auto m = transfer_matrix(data, config, res);
      std::string out = format_transfer_grid(m);
      for (const auto& spec : tr_pooled) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) throw ValidationError("pooled spec must look like fear+sadness:sadness");
        std::vector<Emotion> train_e;
        for (auto part : split(std::string_view(spec).substr(0, colon), '+')) {
          auto e = parse_emotion(trim(part));
          if (!e) throw ValidationError("unknown emotion '" + std::string(part) + "'");
          train_e.push_back(*e);
        }
        auto test_e = parse_emotion(std::string_view(spec).substr(colon + 1));
        if (!test_e) throw ValidationError("unknown emotion in '" + spec + "'");
        const auto r = pooled_transfer(data, train_e, *test_e, config, res);
        out += "pooled " + spec + '\t' + format_fixed(r.pearson, 2) + '\n';
      }
      emit(tr_c, out);
      if (!tr_flat.empty()) write_file(tr_flat, format_transfer_flat(m));
    } else if (*srv) {
      Study study;
      study.design = std::make_shared<const TupleDesign>(load_design(srv_tuples));
      if (!srv_gold.empty()) study.gold = parse_gold(read_file(srv_gold));
      for (const auto& item : read_dataset(srv_items, srv_items_format).items) study.texts[item.id] = item.text;
      study.emotion = *parse_emotion(srv_emotion);
      SessionConfig defaults;
      defaults.seed = srv_c.seed;
      defaults.per_tuple = srv_per_tuple;
      SessionStore store(srv_storage.empty() ? SessionStore::storage_dir_from_env("bws-sessions") : srv_storage);
      Api api(store, study, defaults);
      // Validate the configuration once so a bad gold file fails at startup.
      Session probe(study.design, study.gold, defaults);
      httplib::Server server;
      bind_routes(server, api);
      std::cerr << "listening on " << srv_host << ":" << srv_port << ", sessions in " << store.directory() << "\n";
      if (!server.listen(srv_host, srv_port)) throw ResourceError("cannot listen on " + srv_host + ":" + std::to_string(srv_port));
    }
  } catch (const bws::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
