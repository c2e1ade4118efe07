// Copyright 2026 The Attrib Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "attrib/cli.hpp"

#include <algorithm>
#include <bit>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "attrib/arenasim.hpp"
#include "attrib/baselines.hpp"
#include "attrib/copymodel.hpp"
#include "attrib/corpus.hpp"
#include "attrib/evaluate.hpp"
#include "attrib/featurize.hpp"
#include "attrib/rng.hpp"
#include "attrib/scorer.hpp"
#include "json.hpp"

namespace attrib::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
  if (!j.is_object()) throw ValidationError(context + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (allowed.count(key) == 0) {
      throw ValidationError(context + ": unknown key '" + key + "'");
    }
  }
}

// Collects artifacts as they are written and emits manifest.json last.
class RunDir {
 public:
  explicit RunDir(const std::string& out_dir) : dir_(out_dir) {
    if (dir_.empty()) throw ValidationError("output directory must be set");
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void record(const std::string& name) { artifacts_.push_back(name); }

  std::string write_text(const std::string& name, const std::string& content) {
    const std::string p = path(name);
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p);
    out << content;
    record(name);
    return p;
  }

  void write_resolved_config(const json& resolved) {
    write_text("resolved_config.json", resolved.dump(2) + "\n");
  }

  void finalize() {
    json manifest;
    manifest["artifacts"] = json::array();
    for (const auto& name : artifacts_) {
      std::ifstream in(path(name), std::ios::binary);
      std::ostringstream bytes;
      bytes << in.rdbuf();
      manifest["artifacts"].push_back({{"path", name}, {"sha256", sha256_hex(bytes.str())}});
    }
    std::ofstream out(path("manifest.json"));
    out << manifest.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::vector<std::string> artifacts_;
};

NegativeStrategy strategy_from_string(const std::string& name) {
  if (name == "hard") return NegativeStrategy::kHard;
  if (name == "easy") return NegativeStrategy::kEasy;
  if (name == "random") return NegativeStrategy::kRandom;
  throw ValidationError("unknown negative strategy '" + name + "'");
}

template <typename Fn>
auto validated(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  } catch (const std::runtime_error& e) {
    throw ValidationError(e.what());
  }
}

struct SplitSpec {
  uint64_t seed = 42;
  size_t train = 1000;
  size_t val = 200;
  size_t test = 200;

  static SplitSpec parse(const json& j) {
    SplitSpec s;
    check_keys(j, {"seed", "train", "val", "test"}, "split");
    s.seed = j.value("seed", s.seed);
    s.train = j.value("train", s.train);
    s.val = j.value("val", s.val);
    s.test = j.value("test", s.test);
    return s;
  }

  json resolved() const {
    return {{"seed", seed}, {"train", train}, {"val", val}, {"test", test}};
  }
};

// Shared detector-training setup: corpus, split, embedder, preference pairs.
struct DetectorData {
  ResponseCorpus corpus;
  SplitCorpus split;
  std::vector<PreferencePair> pairs;
  std::vector<std::string> train_texts;     // y_star then y_o per pair
  std::vector<int> labels;                  // aligned with train_texts
  std::vector<std::string> all_train_responses;  // every model's train responses
};

DetectorData prepare_detector_data(const std::string& responses_path, const SplitSpec& split_spec,
                                   const std::string& target, NegativeStrategy strategy,
                                   uint64_t global_seed, const std::string& embeddings_path) {
  DetectorData data;
  data.corpus = validated([&] { return load_responses(responses_path); });
  data.split = validated([&] {
    return split_corpus(data.corpus, split_spec.seed, split_spec.train, split_spec.val,
                        split_spec.test);
  });

  for (const auto& qid : data.split.train) {
    for (const auto& model : data.corpus.models()) {
      const ResponseRecord* rec = data.corpus.find(qid, model);
      if (rec != nullptr) data.all_train_responses.push_back(rec->response);
    }
  }
  if (data.all_train_responses.empty()) throw ValidationError("empty training split");

  // Negative mining uses the internal TF-IDF embedder unless a precomputed
  // embedding file is supplied.
  std::unique_ptr<Embedder> embedder;
  if (embeddings_path.empty()) {
    embedder = std::make_unique<InternalEmbedder>(data.all_train_responses);
  } else {
    embedder = validated([&] { return std::make_unique<ExternalEmbedder>(embeddings_path); });
  }
  SplitMix64 rng(derive_seed(global_seed, "negatives"));
  data.pairs = validated([&] {
    return build_pairs(data.corpus, data.split.train, target, strategy,
                       [&](const std::string& text) { return embedder->embed(text); }, rng);
  });
  for (const auto& pair : data.pairs) {
    data.train_texts.push_back(pair.y_star);
    data.labels.push_back(1);
    data.train_texts.push_back(pair.y_o);
    data.labels.push_back(0);
  }
  return data;
}

}  // namespace

void cmd_ingest(const IngestOptions& options, std::ostream& log) {
  if (options.battles_path.empty() && options.responses_path.empty()) {
    throw ValidationError("ingest: provide --battles and/or --responses");
  }
  json summary;
  if (!options.battles_path.empty()) {
    const auto battles = validated([&] { return load_battles(options.battles_path); });
    std::set<std::string> models;
    size_t a_wins = 0, b_wins = 0, ties = 0;
    for (const auto& b : battles) {
      models.insert(b.model_a);
      models.insert(b.model_b);
      switch (b.outcome) {
        case Outcome::kAWins: ++a_wins; break;
        case Outcome::kBWins: ++b_wins; break;
        case Outcome::kTie: ++ties; break;
      }
    }
    summary["battles"] = {{"path", options.battles_path},
                          {"records", battles.size()},
                          {"models", models.size()},
                          {"a_wins", a_wins},
                          {"b_wins", b_wins},
                          {"ties", ties}};
    log << "battles: " << battles.size() << " records, " << models.size() << " models ("
        << a_wins << " A wins, " << b_wins << " B wins, " << ties << " ties)\n";
  }
  if (!options.responses_path.empty()) {
    const ResponseCorpus corpus = validated([&] { return load_responses(options.responses_path); });
    std::map<std::string, size_t> per_model;
    for (const auto& r : corpus.records()) ++per_model[r.model];
    summary["responses"] = {{"path", options.responses_path},
                            {"records", corpus.size()},
                            {"queries", corpus.query_ids().size()},
                            {"models", corpus.models().size()},
                            {"per_model", per_model}};
    log << "responses: " << corpus.size() << " records, " << corpus.query_ids().size()
        << " queries, " << corpus.models().size() << " models\n";
    for (const auto& [model, count] : per_model) log << "  " << model << ": " << count << '\n';
  }
  if (!options.out_dir.empty()) {
    RunDir run(options.out_dir);
    run.write_text("ingest_summary.json", summary.dump(2) + "\n");
    run.finalize();
  }
}

void cmd_train_baseline(const std::string& config_path, const std::string& out_dir,
                        std::ostream& log) {
  const json config = load_config(config_path);
  check_keys(config,
             {"seed", "responses", "target", "feature", "split", "negatives", "embeddings",
              "c", "max_iter", "tol", "seeds", "histogram_bins"},
             "train-baseline config");
  for (const char* required : {"responses", "target", "feature"}) {
    if (!config.contains(required)) {
      throw ValidationError(std::string("train-baseline config: missing '") + required + "'");
    }
  }

  const uint64_t seed = config.value("seed", 0ULL);
  const std::string responses_path = config.at("responses").get<std::string>();
  const std::string target = config.at("target").get<std::string>();
  const BaselineKind kind =
      validated([&] { return baseline_kind_from_string(config.at("feature").get<std::string>()); });
  const SplitSpec split_spec =
      config.contains("split") ? SplitSpec::parse(config.at("split")) : SplitSpec{};
  const NegativeStrategy strategy = strategy_from_string(config.value("negatives", "hard"));
  const double c = config.value("c", 1.0);
  const int max_iter = config.value("max_iter", 2000);
  const double tol = config.value("tol", 1e-8);
  const std::vector<uint64_t> seeds =
      config.value("seeds", std::vector<uint64_t>{100, 200, 300, 400, 500});
  const int histogram_bins = config.value("histogram_bins", 40);
  const std::string embeddings = config.value("embeddings", std::string());

  DetectorData data =
      prepare_detector_data(responses_path, split_spec, target, strategy, seed, embeddings);

  const BaselineFeaturizer featurizer =
      validated([&] { return BaselineFeaturizer::fit(kind, data.train_texts); });
  std::vector<SparseVector> features;
  features.reserve(data.train_texts.size());
  for (const auto& text : data.train_texts) features.push_back(featurizer.transform(text));

  const auto detector_fn = [&](const LinearModel& model) {
    return ScoreFn([&featurizer, &model](const std::string&, const std::string& response) {
      return score(model, featurizer.transform(response));
    });
  };

  const LinearModel best = select_by_val_auroc(
      [&](uint64_t train_seed) {
        LogRegConfig lr_config{c, max_iter, tol, train_seed};
        return train_logreg(features, data.labels, lr_config);
      },
      [&](const LinearModel& model) {
        return full_report(detector_fn(model), data.corpus, data.split.val, target, 0).macro_auroc;
      },
      seeds);

  const EvalReport test_report =
      full_report(detector_fn(best), data.corpus, data.split.test, target, histogram_bins);

  RunDir run(out_dir);
  LinearModel named = best;
  named.feature_spec = to_string(kind);
  const BaselineDetector detector(kind, named, featurizer.vocab, featurizer.idf,
                                  featurizer.standardizer);
  detector.save(run.path("baseline.ckpt.json"));
  run.record("baseline.ckpt.json");
  write_report_csv(test_report, run.path("eval_report.csv"));
  run.record("eval_report.csv");
  run.write_text("eval_report.md", report_markdown(test_report));
  write_histogram_csv(test_report, run.path("histogram.csv"));
  run.record("histogram.csv");
  if (kind == BaselineKind::kBow || kind == BaselineKind::kTfidf) {
    write_vocab_csv(featurizer.vocab, run.path("vocabulary.csv"));
    run.record("vocabulary.csv");
  }

  json resolved = {{"seed", seed},
                   {"responses", responses_path},
                   {"target", target},
                   {"feature", to_string(kind)},
                   {"split", split_spec.resolved()},
                   {"negatives", config.value("negatives", "hard")},
                   {"embeddings", embeddings},
                   {"c", c},
                   {"max_iter", max_iter},
                   {"tol", tol},
                   {"seeds", seeds},
                   {"histogram_bins", histogram_bins}};
  run.write_resolved_config(resolved);
  run.finalize();

  log << "baseline " << to_string(kind) << " for target " << target
      << ": test accuracy=" << test_report.macro_accuracy
      << " auroc=" << test_report.macro_auroc << '\n';
}

namespace {

struct ScorerRunConfig {
  uint64_t seed = 0;
  std::string responses_path;
  std::string target;
  SplitSpec split;
  NegativeStrategy strategy = NegativeStrategy::kHard;
  CurriculumConfig curriculum;
  ScorerFeatureConfig feature;
  int copy_order = 3;
  double copy_smoothing = 0.5;
  std::string copy_alphabet = NgramLM::printable_ascii_alphabet();
  SampleConfig sample;
  int histogram_bins = 40;
  std::string strategy_name = "hard";
  std::string embeddings;

  static ScorerRunConfig parse(const json& config, const ScorerOverrides& overrides) {
    check_keys(config,
               {"seed", "responses", "target", "split", "negatives", "embeddings",
                "use_triplet", "use_adaptive", "stages", "lambdas", "warmup_steps",
                "batch_size", "feature", "copy_model", "histogram_bins"},
               "train-scorer config");
    for (const char* required : {"responses", "target"}) {
      if (!config.contains(required)) {
        throw ValidationError(std::string("train-scorer config: missing '") + required + "'");
      }
    }
    ScorerRunConfig out;
    out.seed = config.value("seed", 0ULL);
    out.responses_path = config.at("responses").get<std::string>();
    out.target = config.at("target").get<std::string>();
    if (config.contains("split")) out.split = SplitSpec::parse(config.at("split"));
    out.strategy_name = config.value("negatives", "hard");
    if (overrides.negatives) out.strategy_name = *overrides.negatives;
    out.strategy = strategy_from_string(out.strategy_name);
    out.embeddings = config.value("embeddings", std::string());

    CurriculumConfig& cur = out.curriculum;
    cur.use_triplet = config.value("use_triplet", true);
    cur.use_adaptive = config.value("use_adaptive", true);
    if (overrides.no_triplet) cur.use_triplet = false;
    if (overrides.no_adaptive) cur.use_adaptive = false;
    cur.warmup_steps = config.value("warmup_steps", 100);
    cur.batch_size = config.value("batch_size", 8);
    if (config.contains("lambdas")) {
      const auto l = config.at("lambdas").get<std::vector<double>>();
      if (l.size() != 3) throw ValidationError("lambdas must have three components");
      cur.lambdas = {l[0], l[1], l[2]};
    }
    if (config.contains("stages")) {
      for (const auto& stage_json : config.at("stages")) {
        check_keys(stage_json, {"alpha", "learning_rate", "epochs"}, "stage");
        StageConfig stage;
        stage.alpha = stage_json.value("alpha", 0.5);
        stage.learning_rate = stage_json.value("learning_rate", 0.3);
        stage.epochs = stage_json.value("epochs", 5);
        cur.stages.push_back(stage);
      }
    } else {
      cur.stages = {{0.5, 0.3, 5}, {0.75, 0.15, 5}};  // stage 2 at half rate
    }
    if (overrides.stages) {
      const int keep = *overrides.stages;
      if (keep < 1 || keep > static_cast<int>(cur.stages.size())) {
        throw ValidationError("--stages must be between 1 and the configured stage count");
      }
      cur.stages.resize(static_cast<size_t>(keep));
    }

    if (config.contains("feature")) {
      const auto& f = config.at("feature");
      check_keys(f, {"hash_dim", "char_ngram", "include_query"}, "feature");
      out.feature.hash_dim = f.value("hash_dim", out.feature.hash_dim);
      out.feature.char_ngram = f.value("char_ngram", out.feature.char_ngram);
      out.feature.include_query = f.value("include_query", out.feature.include_query);
    }
    if (config.contains("copy_model")) {
      const auto& cm = config.at("copy_model");
      check_keys(cm, {"order", "smoothing", "alphabet", "max_len", "temperature", "match_target_length"},
                 "copy_model");
      out.copy_order = cm.value("order", out.copy_order);
      out.copy_smoothing = cm.value("smoothing", out.copy_smoothing);
      if (cm.contains("alphabet")) {
        const auto name = cm.at("alphabet").get<std::string>();
        if (name != "printable_ascii") out.copy_alphabet = name;  // literal alphabet string
      }
      out.sample.max_len = cm.value("max_len", out.sample.max_len);
      out.sample.temperature = cm.value("temperature", out.sample.temperature);
      out.sample.match_target_length =
          cm.value("match_target_length", out.sample.match_target_length);
    }
    out.histogram_bins = config.value("histogram_bins", 40);
    validated([&] { cur.validate(); return 0; });
    return out;
  }

  json resolved() const {
    json stages_json = json::array();
    for (const auto& s : curriculum.stages) {
      stages_json.push_back(
          {{"alpha", s.alpha}, {"learning_rate", s.learning_rate}, {"epochs", s.epochs}});
    }
    return {{"seed", seed},
            {"responses", responses_path},
            {"target", target},
            {"split", split.resolved()},
            {"negatives", strategy_name},
            {"embeddings", embeddings},
            {"use_triplet", curriculum.use_triplet},
            {"use_adaptive", curriculum.use_adaptive},
            {"stages", stages_json},
            {"lambdas", {curriculum.lambdas.l1, curriculum.lambdas.l2, curriculum.lambdas.l3}},
            {"warmup_steps", curriculum.warmup_steps},
            {"batch_size", curriculum.batch_size},
            {"feature",
             {{"hash_dim", feature.hash_dim},
              {"char_ngram", feature.char_ngram},
              {"include_query", feature.include_query}}},
            {"copy_model",
             {{"order", copy_order},
              {"smoothing", copy_smoothing},
              {"alphabet",
               copy_alphabet == NgramLM::printable_ascii_alphabet() ? "printable_ascii"
                                                                    : copy_alphabet},
              {"max_len", sample.max_len},
              {"temperature", sample.temperature},
              {"match_target_length", sample.match_target_length}}},
            {"histogram_bins", histogram_bins}};
  }
};

// Everything needed to train and evaluate one scorer configuration.
struct ScorerPipeline {
  ScorerRunConfig config;
  DetectorData data;
  LinearScorer scorer;
  NgramLM lm_init;
  NgramLM lm_copy;

  explicit ScorerPipeline(const ScorerRunConfig& run_config) : config(run_config) {
    data = prepare_detector_data(config.responses_path, config.split, config.target,
                                 config.strategy, config.seed, config.embeddings);
    std::vector<std::string> queries;
    if (config.feature.include_query) {
      for (const auto& qid : data.split.train) {
        const std::string* q = data.corpus.query_text(qid);
        if (q != nullptr) queries.push_back(*q);
      }
    }
    scorer = LinearScorer(
        ScorerFeatureMap::fit(config.feature, data.all_train_responses, queries));

    if (config.curriculum.use_triplet) {
      std::vector<std::string> target_texts, other_texts;
      for (const auto& qid : data.split.train) {
        for (const auto& model : data.corpus.models()) {
          const ResponseRecord* rec = data.corpus.find(qid, model);
          if (rec == nullptr) continue;
          (model == config.target ? target_texts : other_texts).push_back(rec->response);
        }
      }
      lm_copy = validated([&] {
        return train_copy(target_texts, config.copy_order, config.copy_smoothing,
                          config.copy_alphabet);
      });
      lm_init = validated([&] {
        return train_copy(other_texts, config.copy_order, config.copy_smoothing,
                          config.copy_alphabet);
      });
    }
  }

  std::vector<TripletExample> synthesize(double alpha) const {
    if (!config.curriculum.use_triplet) {
      std::vector<TripletExample> examples;
      examples.reserve(data.pairs.size());
      for (const auto& pair : data.pairs) {
        TripletExample ex;
        ex.query_id = pair.query_id;
        ex.query = pair.query;
        ex.y_star = pair.y_star;
        ex.y_o = pair.y_o;
        ex.assigned_task = TaskKind::kPair;
        examples.push_back(std::move(ex));
      }
      return examples;
    }
    const NgramLM lm_alpha = interpolate(lm_init, lm_copy, alpha);
    const uint64_t run_seed =
        derive_seed(config.seed, "synth") ^ std::bit_cast<uint64_t>(alpha);
    return synth_triplets(data.pairs, lm_alpha, run_seed, config.sample);
  }

  ValEvalFn val_eval() const {
    return [this](const LinearScorer& s) {
      const EvalReport report = full_report(
          [&s](const std::string& q, const std::string& y) { return s.score(q, y); },
          data.corpus, data.split.val, config.target, 0);
      return ValMetrics{report.macro_accuracy, report.macro_auroc};
    };
  }

  EvalReport test_report(int histogram_bins) const {
    return full_report(
        [this](const std::string& q, const std::string& y) { return scorer.score(q, y); },
        data.corpus, data.split.test, config.target, histogram_bins);
  }
};

}  // namespace

void cmd_train_scorer(const std::string& config_path, const std::string& out_dir,
                      const ScorerOverrides& overrides, std::ostream& log) {
  const ScorerRunConfig run_config = ScorerRunConfig::parse(load_config(config_path), overrides);
  ScorerPipeline pipeline(run_config);

  RunDir run(out_dir);
  SplitMix64 train_rng(derive_seed(run_config.seed, "scorer-train"));
  std::vector<EpochMetrics> full_log;
  const ValEvalFn val_eval = pipeline.val_eval();
  for (size_t k = 0; k < run_config.curriculum.stages.size(); ++k) {
    const StageConfig& stage = run_config.curriculum.stages[k];
    std::vector<TripletExample> dataset = pipeline.synthesize(stage.alpha);
    const StageResult result = train_stage(dataset, pipeline.scorer, stage,
                                           run_config.curriculum, val_eval, train_rng,
                                           static_cast<int>(k + 1));
    full_log.insert(full_log.end(), result.epochs.begin(), result.epochs.end());

    const EvalReport stage_report = pipeline.test_report(0);
    const std::string stage_name = "eval_stage" + std::to_string(k + 1);
    write_report_csv(stage_report, run.path(stage_name + ".csv"));
    run.record(stage_name + ".csv");
    log << "stage " << k + 1 << " (alpha=" << stage.alpha
        << "): test accuracy=" << stage_report.macro_accuracy
        << " auroc=" << stage_report.macro_auroc << '\n';
  }

  save_scorer(pipeline.scorer, run.path("scorer.ckpt.json"));
  run.record("scorer.ckpt.json");
  if (run_config.curriculum.use_triplet) {
    save_ngram_lm(pipeline.lm_init, run.path("copy_model_init.bin"));
    run.record("copy_model_init.bin");
    save_ngram_lm(pipeline.lm_copy, run.path("copy_model_target.bin"));
    run.record("copy_model_target.bin");
  }
  write_training_log_csv(full_log, run.path("training_log.csv"));
  run.record("training_log.csv");

  const EvalReport final_report = pipeline.test_report(run_config.histogram_bins);
  write_report_csv(final_report, run.path("eval_report.csv"));
  run.record("eval_report.csv");
  run.write_text("eval_report.md", report_markdown(final_report));
  write_histogram_csv(final_report, run.path("histogram.csv"));
  run.record("histogram.csv");

  run.write_resolved_config(run_config.resolved());
  run.finalize();
  log << "final: test accuracy=" << final_report.macro_accuracy
      << " auroc=" << final_report.macro_auroc << '\n';
}

void cmd_sweep_alpha(const std::string& config_path, const std::string& out_dir,
                     const std::vector<double>& alphas_override, std::ostream& log) {
  json config = load_config(config_path);
  std::vector<double> alphas = {0.1, 0.3, 0.5, 0.7, 0.9};
  if (config.contains("alphas")) alphas = config.at("alphas").get<std::vector<double>>();
  if (!alphas_override.empty()) alphas = alphas_override;
  config.erase("alphas");
  if (!config.contains("stages")) {
    config["stages"] = json::array({{{"alpha", 0.5}, {"learning_rate", 0.3}, {"epochs", 5}}});
  }
  ScorerRunConfig base = ScorerRunConfig::parse(config, {});
  if (base.curriculum.stages.size() != 1) {
    throw ValidationError("sweep-alpha uses a single-stage curriculum");
  }
  if (!base.curriculum.use_triplet) {
    throw ValidationError("sweep-alpha requires use_triplet");
  }

  RunDir run(out_dir);
  std::ostringstream csv, md;
  csv << "alpha,accuracy,auroc\n";
  csv.precision(12);
  md << "| alpha | Accuracy | AUROC |\n|---|---|---|\n";
  json resolved = base.resolved();
  resolved["alphas"] = alphas;
  for (const double alpha : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha outside [0, 1]");
    ScorerRunConfig run_config = base;
    run_config.curriculum.stages[0].alpha = alpha;
    ScorerPipeline pipeline(run_config);
    SplitMix64 train_rng(derive_seed(run_config.seed, "scorer-train"));
    std::vector<TripletExample> dataset = pipeline.synthesize(alpha);
    train_stage(dataset, pipeline.scorer, run_config.curriculum.stages[0],
                run_config.curriculum, pipeline.val_eval(), train_rng, 1);
    const EvalReport report = pipeline.test_report(0);
    csv << alpha << ',' << report.macro_accuracy << ',' << report.macro_auroc << '\n';
    md << "| " << alpha << " | " << report.macro_accuracy << " | " << report.macro_auroc
       << " |\n";
    log << "alpha=" << alpha << ": accuracy=" << report.macro_accuracy
        << " auroc=" << report.macro_auroc << '\n';
  }
  run.write_text("alpha_sweep.csv", csv.str());
  run.write_text("alpha_sweep.md", md.str());
  run.write_resolved_config(resolved);
  run.finalize();
}

void cmd_simulate(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
  const json config = load_config(config_path);
  check_keys(config,
             {"seed", "battle_log", "pool", "tie_policy", "ridge", "refit_interval",
              "organic_tie_prob", "false_positives", "detector_accuracy", "policy",
              "enemy_window", "max_interactions", "targets", "objective_ranks", "num_seeds"},
             "simulate config");
  for (const char* required : {"battle_log", "targets", "objective_ranks"}) {
    if (!config.contains(required)) {
      throw ValidationError(std::string("simulate config: missing '") + required + "'");
    }
  }

  const uint64_t seed = config.value("seed", 0ULL);
  std::vector<BattleRecord> battles =
      validated([&] { return load_battles(config.at("battle_log").get<std::string>()); });
  if (config.contains("pool")) {
    const auto pool = config.at("pool").get<std::vector<std::string>>();
    const std::set<std::string> keep(pool.begin(), pool.end());
    std::erase_if(battles, [&](const BattleRecord& b) {
      return keep.count(b.model_a) == 0 || keep.count(b.model_b) == 0;
    });
    if (battles.empty()) throw ValidationError("pool restriction removed every battle");
  }

  AttackConfig base;
  const std::string tie_policy = config.value("tie_policy", "half_win");
  if (tie_policy == "half_win") {
    base.bt.tie_policy = TiePolicy::kHalfWin;
  } else if (tie_policy == "drop") {
    base.bt.tie_policy = TiePolicy::kDrop;
  } else {
    throw ValidationError("tie_policy must be half_win or drop");
  }
  base.bt.ridge = config.value("ridge", base.bt.ridge);
  base.refit_interval = config.value("refit_interval", base.refit_interval);
  base.organic_tie_prob = config.value("organic_tie_prob", base.organic_tie_prob);
  base.false_positives = config.value("false_positives", base.false_positives);
  base.detector_accuracy = config.value("detector_accuracy", base.detector_accuracy);
  const std::string policy = config.value("policy", "passive");
  if (policy == "passive") {
    base.policy = PolicyKind::kPassive;
  } else if (policy == "aggressive") {
    base.policy = PolicyKind::kAggressive;
  } else {
    throw ValidationError("policy must be passive or aggressive");
  }
  base.enemy_window = config.value("enemy_window", base.enemy_window);
  base.max_interactions = config.value("max_interactions", base.max_interactions);

  const auto targets = config.at("targets").get<std::vector<std::string>>();
  const auto ranks = config.at("objective_ranks").get<std::vector<int>>();
  const size_t num_seeds = config.value("num_seeds", 1ULL);
  if (num_seeds < 1) throw ValidationError("num_seeds must be >= 1");
  std::vector<uint64_t> seeds;
  for (size_t i = 0; i < num_seeds; ++i) seeds.push_back(derive_seed(seed, "simulate") + i);

  const SweepTable table =
      validated([&] { return run_sweep(battles, base, targets, ranks, seeds); });

  RunDir run(out_dir);
  write_sweep_csv(table, run.path("sweep.csv"));
  run.record("sweep.csv");
  run.write_text("sweep.md", sweep_markdown(table));

  // One trajectory per scenario from the first seed, for plotting.
  for (const auto& cell : table.cells) {
    AttackConfig config_run = base;
    config_run.target = cell.target;
    config_run.seed = seeds.front();
    config_run.objective.kind = cell.objective_rank < cell.current_rank
                                    ? ObjectiveKind::kPromoteTo
                                    : ObjectiveKind::kDemoteTo;
    config_run.objective.rank = cell.objective_rank;
    const SimulationReport report = run_simulation(battles, config_run);
    std::string name = "trajectory_" + cell.target + "_rank" +
                       std::to_string(cell.objective_rank) + ".csv";
    std::replace_if(name.begin(), name.end(),
                    [](char c) { return c == '/' || c == ' ' || c == ':'; }, '-');
    write_trajectory_csv(report, run.path(name));
    run.record(name);
  }

  json resolved = {{"seed", seed},
                   {"battle_log", config.at("battle_log")},
                   {"tie_policy", tie_policy},
                   {"ridge", base.bt.ridge},
                   {"refit_interval", base.refit_interval},
                   {"organic_tie_prob", base.organic_tie_prob},
                   {"false_positives", base.false_positives},
                   {"detector_accuracy", base.detector_accuracy},
                   {"policy", policy},
                   {"enemy_window", base.enemy_window},
                   {"max_interactions", base.max_interactions},
                   {"targets", targets},
                   {"objective_ranks", ranks},
                   {"num_seeds", num_seeds}};
  if (config.contains("pool")) resolved["pool"] = config.at("pool");
  run.write_resolved_config(resolved);
  run.finalize();

  log << sweep_markdown(table);
}

void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_path,
                std::ostream& log) {
  if (run_dirs.empty()) throw ValidationError("report: no run directories given");
  std::ostringstream md;
  md << "# Run summary\n";
  for (const auto& dir : run_dirs) {
    const fs::path base(dir);
    md << "\n## " << base.filename().string() << "\n\n";
    const fs::path manifest_path = base / "manifest.json";
    if (!fs::exists(manifest_path)) {
      throw ValidationError("no manifest.json in " + dir);
    }
    std::ifstream in(manifest_path);
    json manifest;
    in >> manifest;
    md << "Artifacts:\n\n";
    for (const auto& artifact : manifest.at("artifacts")) {
      md << "- `" << artifact.at("path").get<std::string>() << "` (sha256 "
         << artifact.at("sha256").get<std::string>().substr(0, 12) << "...)\n";
    }
    for (const auto& artifact : manifest.at("artifacts")) {
      const std::string name = artifact.at("path").get<std::string>();
      if (name.size() > 3 && name.substr(name.size() - 3) == ".md") {
        std::ifstream table(base / name);
        md << '\n';
        md << table.rdbuf();
      }
    }
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write report: " + out_path);
  out << md.str();
  log << "wrote " << out_path << '\n';
}

}  // namespace attrib::cli
