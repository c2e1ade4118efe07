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

#include "attrib/scorer.hpp"

#include "attrib/copymodel.hpp"

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "attrib/corpus.hpp"
#include "attrib/evaluate.hpp"
#include "attrib/featurize.hpp"
#include "doctest.h"
#include "synthetic.hpp"

using namespace attrib;

namespace {

std::string random_text(SplitMix64& rng, size_t words) {
  static const char* pool[] = {"red", "green", "blue", "maple", "stone", "river",
                               "cloud", "amber", "7", "fox!", "Quip", "zigzag"};
  std::string text;
  for (size_t i = 0; i < words; ++i) {
    if (!text.empty()) text.push_back(' ');
    text += pool[rng.below(12)];
  }
  return text;
}

ScorerFeatureMap small_map(SplitMix64& rng, uint32_t hash_dim = 16) {
  ScorerFeatureConfig config;
  config.hash_dim = hash_dim;
  config.char_ngram = 3;
  std::vector<std::string> texts;
  for (int i = 0; i < 12; ++i) {
    // The suffix keeps every scalar column non-constant over the fit
    // sample; a constant column hits the standardizer floor and produces
    // badly conditioned features.
    texts.push_back(random_text(rng, 4 + rng.below(8)) + (i % 2 ? " Z9!" : ""));
  }
  return ScorerFeatureMap::fit(config, texts);
}

std::vector<TripletExample> random_batch(SplitMix64& rng, size_t n) {
  std::vector<TripletExample> batch;
  for (size_t i = 0; i < n; ++i) {
    TripletExample ex;
    ex.query_id = "q" + std::to_string(i);
    ex.query = random_text(rng, 5);
    ex.y_star = random_text(rng, 4 + rng.below(8));
    ex.y_alpha = random_text(rng, 4 + rng.below(8));
    ex.y_o = random_text(rng, 4 + rng.below(8));
    ex.assigned_task = rng.bernoulli(0.5) ? TaskKind::kTriplet : TaskKind::kPair;
    batch.push_back(std::move(ex));
  }
  return batch;
}

}  // namespace

TEST_CASE("pref_loss values") {
  CHECK(pref_loss(1.0, 1.0) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  // High-precision evaluations of log(1 + e^-delta).
  CHECK(pref_loss(20.0, 0.0) == doctest::Approx(2.0611536181902037e-9).epsilon(1e-9));
  CHECK(pref_loss(0.0, 20.0) == doctest::Approx(20.000000002061154).epsilon(1e-12));
  CHECK(pref_loss(800.0, 0.0) == 0.0);     // underflow, not overflow
  CHECK(pref_loss(0.0, 800.0) == 800.0);   // linear asymptote
}

TEST_CASE("pref_loss is monotone: decreasing in s_w, increasing in s_l") {
  SplitMix64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const double s_w = rng.next_double() * 40.0 - 20.0;
    const double s_l = rng.next_double() * 40.0 - 20.0;
    const double eps = 1e-6 + rng.next_double();
    CHECK(pref_loss(s_w + eps, s_l) < pref_loss(s_w, s_l));
    CHECK(pref_loss(s_w, s_l + eps) > pref_loss(s_w, s_l));
  }
}

TEST_CASE("triplet_loss values and bitwise pairwise reduction") {
  const Lambdas lambdas{0.3, 0.3, 1.0};
  CHECK(triplet_loss(0.0, 0.0, 0.0, lambdas) ==
        doctest::Approx(1.6 * 0.6931471805599453).epsilon(1e-12));
  SplitMix64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.next_double() * 10 - 5;
    const double b = rng.next_double() * 10 - 5;
    const double c = rng.next_double() * 10 - 5;
    CHECK(triplet_loss(a, b, c, {0.0, 0.0, 1.0}) == pref_loss(a, c));  // bitwise
  }
  CHECK(triplet_loss(60.0, 30.0, 0.0, lambdas) < 1e-12);  // well-ordered scores
}

TEST_CASE("shift invariance of losses, margins, and assignments") {
  SplitMix64 rng(5);
  const Lambdas lambdas{0.3, 0.3, 1.0};
  for (int i = 0; i < 100; ++i) {
    const double a = rng.next_double() * 10 - 5;
    const double b = rng.next_double() * 10 - 5;
    const double c = rng.next_double() * 10 - 5;
    const double shift = rng.next_double() * 100 - 50;
    CHECK(triplet_loss(a + shift, b + shift, c + shift, lambdas) ==
          doctest::Approx(triplet_loss(a, b, c, lambdas)).epsilon(1e-9));
    CHECK(pref_loss(a + shift, c + shift) == doctest::Approx(pref_loss(a, c)).epsilon(1e-9));
    CHECK(((a + shift) - (c + shift) < 0) == (a - c < 0));
  }
}

TEST_CASE("margin equals a manual dot product") {
  SplitMix64 rng(6);
  ScorerFeatureMap map = small_map(rng);
  LinearScorer scorer(map);
  for (auto& t : scorer.mutable_theta()) t = rng.next_double() * 2.0 - 1.0;

  const std::string query = "what color";
  const std::string y_star = "red maple stone";
  const std::string y_o = "blue river cloud";
  const auto phi_star = scorer.feature_map().features(query, y_star);
  const auto phi_o = scorer.feature_map().features(query, y_o);
  double expected = 0.0;
  for (size_t i = 0; i < phi_star.size(); ++i) {
    expected += scorer.theta()[i] * (phi_star[i] - phi_o[i]);
  }
  CHECK(margin(scorer, query, y_star, y_o) == doctest::Approx(expected).epsilon(1e-12));

  // Zero parameters give zero margin for every example.
  LinearScorer zero(scorer.feature_map());
  CHECK(margin(zero, query, y_star, y_o) == 0.0);
  CHECK(margin(scorer, query, y_star, y_star) == 0.0);
}

TEST_CASE("assign_tasks splits on the sign of the margin") {
  SplitMix64 rng(7);
  ScorerFeatureMap map = small_map(rng);
  LinearScorer scorer(map);
  std::vector<TripletExample> dataset = random_batch(rng, 40);

  // Zero scorer: every margin is exactly 0, which keeps the triplet task.
  assign_tasks(dataset, scorer);
  for (const auto& ex : dataset) CHECK(ex.assigned_task == TaskKind::kTriplet);

  for (auto& t : scorer.mutable_theta()) t = rng.next_double() * 2.0 - 1.0;
  assign_tasks(dataset, scorer);
  size_t pairs = 0;
  for (const auto& ex : dataset) {
    const double m = margin(scorer, ex.query, ex.y_star, ex.y_o);
    CHECK(ex.assigned_task == (m < 0 ? TaskKind::kPair : TaskKind::kTriplet));
    pairs += ex.assigned_task == TaskKind::kPair ? 1 : 0;
  }
  CHECK(pairs > 0);  // random scores land on both sides
  CHECK(pairs < dataset.size());
}

TEST_CASE("analytic gradient matches central finite differences") {
  SplitMix64 rng(8);
  const Lambdas lambdas{0.3, 0.3, 1.0};
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    ScorerFeatureMap map = small_map(rng, 12);
    LinearScorer scorer(map);
    for (auto& t : scorer.mutable_theta()) t = rng.next_double() * 2.0 - 1.0;
    std::vector<TripletExample> batch = random_batch(rng, 6);
    const bool use_triplet = trial % 2 == 0;

    std::vector<double> grad;
    loss_gradient(batch, scorer, lambdas, use_triplet, grad);

    std::vector<double> dummy;
    for (size_t i = 0; i < scorer.theta().size(); ++i) {
      const double saved = scorer.theta()[i];
      scorer.mutable_theta()[i] = saved + h;
      const double up = loss_gradient(batch, scorer, lambdas, use_triplet, dummy);
      scorer.mutable_theta()[i] = saved - h;
      const double down = loss_gradient(batch, scorer, lambdas, use_triplet, dummy);
      scorer.mutable_theta()[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      // Zero-gradient components only see last-ulp roundoff in the central
      // difference; the absolute floor covers those.
      const double err = std::abs(fd - grad[i]);
      const double rel = err < 1e-9 ? 0.0 : err / std::max(std::abs(grad[i]), std::abs(fd));
      CHECK(rel < 1e-5);
    }
  }
}

TEST_CASE("train_stage keeps the best validation checkpoint") {
  SplitMix64 rng(9);
  ScorerFeatureMap map = small_map(rng);
  LinearScorer scorer(map);
  std::vector<TripletExample> dataset = random_batch(rng, 24);

  std::vector<std::vector<double>> snapshots;
  const std::vector<double> aurocs = {0.6, 0.9, 0.7};
  size_t call = 0;
  const ValEvalFn val_eval = [&](const LinearScorer& s) {
    snapshots.push_back(s.theta());
    return ValMetrics{0.5, aurocs[call++ % aurocs.size()]};
  };

  StageConfig stage;
  stage.alpha = 0.5;
  stage.learning_rate = 0.1;
  stage.epochs = 3;
  CurriculumConfig config;
  config.stages = {stage};
  config.warmup_steps = 2;
  config.batch_size = 8;

  SplitMix64 train_rng(1);
  const StageResult result = train_stage(dataset, scorer, stage, config, val_eval, train_rng, 1);
  CHECK(result.best_epoch == 2);
  CHECK(result.best_val_auroc == 0.9);
  CHECK(scorer.theta() == snapshots[1]);  // epoch 2 checkpoint restored
  REQUIRE(result.epochs.size() == 3);
  CHECK(result.epochs[0].val_auroc == 0.6);
  CHECK(result.epochs[2].stage == 1);
}

TEST_CASE("train_stage aborts on a non-finite loss with diagnostics") {
  SplitMix64 rng(10);
  ScorerFeatureMap map = small_map(rng);
  LinearScorer scorer(map);
  std::vector<TripletExample> dataset = random_batch(rng, 16);

  StageConfig stage;
  stage.learning_rate = 1e308;  // guarantees score overflow within a few steps
  stage.epochs = 50;
  CurriculumConfig config;
  config.stages = {stage};
  config.warmup_steps = 0;
  const ValEvalFn val_eval = [](const LinearScorer&) { return ValMetrics{0.5, 0.5}; };
  SplitMix64 train_rng(2);
  CHECK_THROWS_WITH_AS(train_stage(dataset, scorer, stage, config, val_eval, train_rng, 1),
                       doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("curriculum config validation") {
  CurriculumConfig config;
  config.stages = {{0.5, 0.3, 5}, {0.75, 0.15, 5}};
  CHECK_NOTHROW(config.validate());
  config.stages = {{0.75, 0.3, 5}, {0.5, 0.15, 5}};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.stages = {{0.5, 0.3, 5}};
  config.lambdas = {-0.1, 0.3, 1.0};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.lambdas = {};
  config.batch_size = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

namespace {

// Minimal end-to-end training setup on the planted corpus.
struct ToyPipeline {
  ResponseCorpus corpus;
  SplitCorpus split;
  std::vector<PreferencePair> pairs;
  LinearScorer scorer;
  NgramLM lm_init;
  NgramLM lm_copy;
  std::string target = "m0a";
  uint64_t seed;

  explicit ToyPipeline(uint64_t global_seed, double family_sep = 1.2, double twin_delta = 0.7)
      : seed(global_seed) {
    testsupport::SynthConfig config;
    config.n_queries = 240;
    config.n_families = 4;
    config.family_sep = family_sep;
    config.twin_delta = twin_delta;
    config.seed = global_seed;
    corpus = testsupport::make_corpus(config);
    split = split_corpus(corpus, 42, 140, 50, 50);

    std::vector<std::string> train_texts, target_texts, other_texts;
    for (const auto& qid : split.train) {
      for (const auto& model : corpus.models()) {
        const auto* rec = corpus.find(qid, model);
        train_texts.push_back(rec->response);
        (model == target ? target_texts : other_texts).push_back(rec->response);
      }
    }
    const InternalEmbedder embedder(train_texts);
    SplitMix64 rng(derive_seed(global_seed, "negatives"));
    pairs = build_pairs(corpus, split.train, target, NegativeStrategy::kHard,
                        [&](const std::string& t) { return embedder.embed(t); }, rng);

    ScorerFeatureConfig feature;
    feature.hash_dim = 1024;
    scorer = LinearScorer(ScorerFeatureMap::fit(feature, train_texts));
    lm_copy = train_copy(target_texts, 3, 0.5, testsupport::desk_alphabet());
    lm_init = train_copy(other_texts, 3, 0.5, testsupport::desk_alphabet());
  }

  SynthFn synth_fn() {
    return [this](double alpha) {
      SampleConfig sample_config;
      sample_config.max_len = 256;
      return synth_triplets(pairs, interpolate(lm_init, lm_copy, alpha),
                            derive_seed(seed, "synth") ^ std::bit_cast<uint64_t>(alpha),
                            sample_config);
    };
  }

  ValEvalFn val_fn() {
    return [this](const LinearScorer& s) {
      const EvalReport report = full_report(
          [&s](const std::string& q, const std::string& y) { return s.score(q, y); }, corpus,
          split.val, target, 0);
      return ValMetrics{report.macro_accuracy, report.macro_auroc};
    };
  }

  double test_accuracy() const {
    const EvalReport report = full_report(
        [this](const std::string& q, const std::string& y) { return scorer.score(q, y); },
        corpus, split.test, target, 0);
    return report.macro_accuracy;
  }
};

}  // namespace

TEST_CASE("learning sanity: planted separation reaches 0.95 accuracy") {
  ToyPipeline pipeline(123);
  CurriculumConfig config;
  config.stages = {{0.5, 0.3, 5}, {0.75, 0.15, 5}};
  config.warmup_steps = 10;  // scaled to the desk dataset's step budget
  SplitMix64 rng(derive_seed(123, "scorer-train"));
  run_curriculum(config, pipeline.scorer, pipeline.synth_fn(), pipeline.val_fn(), rng);
  CHECK(pipeline.test_accuracy() >= 0.95);
}

TEST_CASE("curriculum is deterministic given seeds and config") {
  const auto run_once = [] {
    ToyPipeline pipeline(7);
    CurriculumConfig config;
    config.stages = {{0.5, 0.3, 2}, {0.75, 0.15, 2}};
    SplitMix64 rng(derive_seed(7, "scorer-train"));
    run_curriculum(config, pipeline.scorer, pipeline.synth_fn(), pipeline.val_fn(), rng);
    return pipeline.scorer.theta();
  };
  const auto theta1 = run_once();
  const auto theta2 = run_once();
  CHECK(theta1 == theta2);
}

TEST_CASE("training log csv layout") {
  std::vector<EpochMetrics> log(2);
  log[0] = {1, 1, 0.5, 0.8, 0.9, 0.25};
  log[1] = {1, 2, 0.4, 0.85, 0.92, 0.1};
  const std::string path =
      (std::filesystem::temp_directory_path() / "attrib_test_training_log.csv").string();
  write_training_log_csv(log, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,stage,mean_loss,val_accuracy,val_auroc,frac_pair_assigned");
  std::string row;
  std::getline(in, row);
  CHECK(row.substr(0, 4) == "1,1,");
  std::filesystem::remove(path);
}

TEST_CASE("scorer checkpoint round-trip") {
  SplitMix64 rng(11);
  ScorerFeatureMap map = small_map(rng);
  LinearScorer scorer(map);
  for (auto& t : scorer.mutable_theta()) t = rng.next_double() - 0.5;

  const std::string path =
      (std::filesystem::temp_directory_path() / "attrib_test_scorer.json").string();
  save_scorer(scorer, path);
  const LinearScorer loaded = load_scorer(path);
  CHECK(loaded.theta() == scorer.theta());
  CHECK(loaded.feature_map().spec_id() == scorer.feature_map().spec_id());
  const std::string q = "query text", y = "response body";
  CHECK(loaded.score(q, y) == scorer.score(q, y));
  std::filesystem::remove(path);
}
