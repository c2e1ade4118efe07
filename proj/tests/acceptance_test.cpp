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

// End-to-end acceptance suite. Each test case checks one release criterion
// and prints a single [PASS]/[FAIL] line with the measured quantities.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "attrib/arenasim.hpp"
#include "attrib/baselines.hpp"
#include "attrib/copymodel.hpp"
#include "attrib/corpus.hpp"
#include "attrib/evaluate.hpp"
#include "attrib/featurize.hpp"
#include "attrib/rng.hpp"
#include "attrib/scorer.hpp"
#include "doctest.h"
#include "synthetic.hpp"

using namespace attrib;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string random_text(SplitMix64& rng, size_t words) {
  static const char* pool[] = {"oak",  "pine", "slate", "brook", "ember", "frost",
                               "gale", "moss", "ridge", "13",    "crow!", "Vale"};
  std::string text;
  for (size_t i = 0; i < words; ++i) {
    if (!text.empty()) text.push_back(' ');
    text += pool[rng.below(12)];
  }
  return text;
}

// One detector-training setup over the planted desk corpus: negative
// mining, feature map, copy/reference models, curriculum training.
struct DeskPipeline {
  ResponseCorpus corpus;
  SplitCorpus split;
  std::vector<PreferencePair> pairs;
  std::vector<std::string> train_texts;
  NgramLM lm_init, lm_copy;
  ScorerFeatureConfig feature;
  uint64_t seed;
  double smoothing;
  std::string target = "m0a";

  DeskPipeline(uint64_t global_seed, size_t n_queries, double family_sep, double twin_delta,
               double lm_smoothing)
      : seed(global_seed), smoothing(lm_smoothing) {
    testsupport::SynthConfig config;
    config.n_queries = n_queries;
    config.n_families = 4;
    config.family_sep = family_sep;
    config.twin_delta = twin_delta;
    config.seed = global_seed;
    corpus = testsupport::make_corpus(config);
    const size_t train_n = n_queries * 14 / 24;
    const size_t val_n = n_queries * 5 / 24;
    split = split_corpus(corpus, 42, train_n, val_n, n_queries - train_n - val_n);

    std::vector<std::string> target_texts, other_texts;
    for (const auto& qid : split.train) {
      for (const auto& model : corpus.models()) {
        const ResponseRecord* rec = corpus.find(qid, model);
        train_texts.push_back(rec->response);
        (model == target ? target_texts : other_texts).push_back(rec->response);
      }
    }
    const InternalEmbedder embedder(train_texts);
    SplitMix64 rng(derive_seed(global_seed, "negatives"));
    pairs = build_pairs(
        corpus, split.train, target, NegativeStrategy::kHard,
        [&](const std::string& t) { return embedder.embed(t); }, rng);
    feature.hash_dim = 1024;
    lm_copy = train_copy(target_texts, 3, smoothing, testsupport::desk_alphabet());
    lm_init = train_copy(other_texts, 3, smoothing, testsupport::desk_alphabet());
  }

  std::vector<TripletExample> synthesize(const std::vector<PreferencePair>& from, double alpha,
                                         const char* stream) const {
    SampleConfig sample_config;
    sample_config.max_len = 400;
    return synth_triplets(from, interpolate(lm_init, lm_copy, alpha),
                          derive_seed(seed, stream) ^ std::bit_cast<uint64_t>(alpha),
                          sample_config);
  }

  // Trains one configuration and returns the scorer at its best checkpoint.
  LinearScorer train(bool use_triplet, bool use_adaptive, int stages) const {
    LinearScorer scorer(ScorerFeatureMap::fit(feature, train_texts));
    CurriculumConfig config;
    config.use_triplet = use_triplet;
    config.use_adaptive = use_adaptive;
    config.warmup_steps = 10;
    config.stages = {{0.5, 0.3, 5}};
    if (stages > 1) config.stages.push_back({0.75, 0.15, 5});
    const SynthFn synth = [this, use_triplet](double alpha) {
      if (!use_triplet) {
        std::vector<TripletExample> examples;
        for (const auto& pair : pairs) {
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
      return synthesize(pairs, alpha, "synth");
    };
    const ValEvalFn val_eval = [this](const LinearScorer& s) {
      const EvalReport rep = full_report(
          [&s](const std::string& q, const std::string& y) { return s.score(q, y); }, corpus,
          split.val, target, 0);
      return ValMetrics{rep.macro_accuracy, rep.macro_auroc};
    };
    SplitMix64 rng(derive_seed(seed, "scorer-train"));
    run_curriculum(config, scorer, synth, val_eval, rng);
    return scorer;
  }

  double test_accuracy(const LinearScorer& scorer) const {
    const EvalReport rep = full_report(
        [&scorer](const std::string& q, const std::string& y) { return scorer.score(q, y); },
        corpus, split.test, target, 0);
    return rep.macro_accuracy;
  }
};

std::vector<std::string> leaderboard_names(size_t count) {
  std::vector<std::string> names;
  for (size_t i = 0; i < count; ++i) {
    char buffer[8];
    std::snprintf(buffer, sizeof(buffer), "m%02zu", i);
    names.emplace_back(buffer);
  }
  return names;
}

}  // namespace

TEST_CASE("criterion 1: analytic gradients match central finite differences") {
  Timer timer;
  SplitMix64 rng(190);
  const Lambdas lambdas{0.3, 0.3, 1.0};
  const double h = 1e-5;
  int instances = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ScorerFeatureConfig config;
    config.hash_dim = 8;
    std::vector<std::string> fit_texts;
    for (int i = 0; i < 10; ++i) {
      // Alternate a digit/caps/punctuation suffix so no scalar feature is
      // constant over the fit sample (a constant column hits the 1e-12
      // standardizer floor and blows up finite differences).
      fit_texts.push_back(random_text(rng, 3 + rng.below(9)) + (i % 2 ? " Z9!" : ""));
    }
    LinearScorer scorer(ScorerFeatureMap::fit(config, fit_texts));
    for (auto& t : scorer.mutable_theta()) t = rng.next_double() * 2.0 - 1.0;

    std::vector<TripletExample> batch;
    for (int i = 0; i < 4; ++i) {
      TripletExample ex;
      ex.query = random_text(rng, 4);
      ex.y_star = random_text(rng, 3 + rng.below(8));
      ex.y_alpha = random_text(rng, 3 + rng.below(8));
      ex.y_o = random_text(rng, 3 + rng.below(8));
      ex.assigned_task = rng.bernoulli(0.5) ? TaskKind::kTriplet : TaskKind::kPair;
      batch.push_back(std::move(ex));
    }
    const bool use_triplet = trial % 2 == 0;  // exercises both loss paths

    std::vector<double> grad, dummy;
    loss_gradient(batch, scorer, lambdas, use_triplet, grad);
    for (size_t i = 0; i < scorer.theta().size(); ++i) {
      const double saved = scorer.theta()[i];
      scorer.mutable_theta()[i] = saved + h;
      const double up = loss_gradient(batch, scorer, lambdas, use_triplet, dummy);
      scorer.mutable_theta()[i] = saved - h;
      const double down = loss_gradient(batch, scorer, lambdas, use_triplet, dummy);
      scorer.mutable_theta()[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      // Relative error on meaningful components; components whose true
      // gradient is exactly zero see only last-ulp roundoff in the central
      // difference (about 1e-12 here), covered by the absolute floor.
      const double err = std::abs(fd - grad[i]);
      const double rel = err < 1e-9 ? 0.0 : err / std::max(std::abs(grad[i]), std::abs(fd));
      worst = std::max(worst, rel);
    }
    ++instances;
  }
  const double elapsed = timer.seconds();
  const bool pass = instances >= 100 && worst < 1e-5 && elapsed < 10.0;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "gradient check on %d instances, worst relative error %.2e, %.1fs", instances,
                worst, elapsed);
  report(1, pass, detail);
  CHECK(instances >= 100);
  CHECK(worst < 1e-5);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 2: interpolation endpoints bitwise, rows on the simplex") {
  testsupport::SynthConfig config;
  config.n_queries = 60;
  config.n_families = 2;
  config.seed = 21;
  const ResponseCorpus corpus = testsupport::make_corpus(config);
  std::vector<std::string> a_texts, b_texts;
  for (const auto& rec : corpus.records()) {
    (rec.model == "m0a" ? a_texts : b_texts).push_back(rec.response);
  }
  const NgramLM a = train_copy(a_texts, 3, 0.5, testsupport::desk_alphabet());
  const NgramLM b = train_copy(b_texts, 3, 0.5, testsupport::desk_alphabet());

  const bool endpoint0 = interpolate(a, b, 0.0).parameters() == a.parameters();
  const bool endpoint1 = interpolate(a, b, 1.0).parameters() == b.parameters();
  double worst_row = 0.0;
  for (const double alpha : {0.25, 0.5, 0.75}) {
    const NgramLM mixed = interpolate(a, b, alpha);
    for (size_t row = 0; row < mixed.num_contexts(); ++row) {
      double sum = 0.0;
      for (size_t s = 0; s < mixed.num_symbols(); ++s) sum += std::exp(mixed.log_prob(row, s));
      worst_row = std::max(worst_row, std::abs(sum - 1.0));
    }
  }
  const bool pass = endpoint0 && endpoint1 && worst_row < 1e-9;
  char detail[160];
  std::snprintf(detail, sizeof(detail), "endpoints bitwise %s/%s, worst row sum deviation %.2e",
                endpoint0 ? "yes" : "no", endpoint1 ? "yes" : "no", worst_row);
  report(2, pass, detail);
  CHECK(endpoint0);
  CHECK(endpoint1);
  CHECK(worst_row < 1e-9);
}

TEST_CASE("criterion 3: Bradley-Terry recovery of planted orderings") {
  Timer timer;
  const std::vector<std::string> models = {"p1", "p2", "p3", "p4", "p5"};
  const std::vector<double> planted = {1.0, 0.5, 0.0, -0.5, -1.0};  // gaps of 0.5 nats
  int recovered = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const auto battles = testsupport::make_battle_log(models, planted, 10000, 0.0, 300 + seed);
    const auto ratings = fit_bt(models, battles);
    bool ordered = true;
    for (size_t i = 0; i + 1 < ratings.size(); ++i) ordered &= ratings[i] > ratings[i + 1];
    recovered += ordered ? 1 : 0;  // Kendall tau = 1 iff the order is exact
  }

  std::vector<BattleRecord> duel;
  for (int i = 0; i < 75; ++i) duel.push_back({"a", "b", Outcome::kAWins, duel.size()});
  for (int i = 0; i < 25; ++i) duel.push_back({"a", "b", Outcome::kBWins, duel.size()});
  BtConfig config;
  config.tie_policy = TiePolicy::kDrop;
  const auto duel_ratings = fit_bt({"a", "b"}, duel, config);
  const double closed_form_err = std::abs(duel_ratings[0] - duel_ratings[1] - std::log(3.0));

  const double elapsed = timer.seconds();
  const bool pass = recovered >= 99 && closed_form_err < 1e-6 && elapsed < 30.0;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "ordering recovered in %d/100 seeds, |delta - ln 3| = %.2e, %.1fs", recovered,
                closed_form_err, elapsed);
  report(3, pass, detail);
  CHECK(recovered >= 99);
  CHECK(closed_form_err < 1e-6);
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 4: interpolated negatives sit at middle difficulty") {
  int seeds_passing = 0;
  const int n_seeds = 5;
  for (int i = 0; i < n_seeds; ++i) {
    const uint64_t seed = 1000 + 31 * static_cast<uint64_t>(i);
    const DeskPipeline desk(seed, 450, 1.2, 0.5, 0.01);
    const LinearScorer scorer = desk.train(true, true, 2);

    // Fresh triplets on the test queries.
    const InternalEmbedder embedder(desk.train_texts);
    SplitMix64 rng(derive_seed(seed, "test-negatives"));
    const auto test_pairs = build_pairs(
        desk.corpus, desk.split.test, desk.target, NegativeStrategy::kHard,
        [&](const std::string& t) { return embedder.embed(t); }, rng);

    bool seed_ok = true;
    for (const double alpha : {0.5, 0.75}) {
      const auto triplets = desk.synthesize(test_pairs, alpha, "test-synth");
      std::vector<double> margin_alpha, margin_other;
      for (const auto& t : triplets) {
        const double s_star = scorer.score(t.query, t.y_star);
        margin_alpha.push_back(s_star - scorer.score(t.query, t.y_alpha));
        margin_other.push_back(s_star - scorer.score(t.query, t.y_o));
      }
      const double med_alpha = median(margin_alpha);
      const double med_other = median(margin_other);
      seed_ok &= med_alpha > 0.0 && med_alpha < med_other;
    }
    seeds_passing += seed_ok ? 1 : 0;
  }
  const bool pass = seeds_passing >= 4;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "median margin inside (0, median hard-negative margin) for alpha {0.5, 0.75} "
                "in %d/%d seeds",
                seeds_passing, n_seeds);
  report(4, pass, detail);
  CHECK(seeds_passing >= 4);
}

TEST_CASE("criterion 5: curriculum components improve ensemble accuracy") {
  const int n_seeds = 8;
  double mean_pair = 0.0, mean_triplet = 0.0, mean_full = 0.0;
  for (int i = 0; i < n_seeds; ++i) {
    const uint64_t seed = 1000 + 31 * static_cast<uint64_t>(i);
    const DeskPipeline desk(seed, 240, 1.2, 0.4, 0.02);
    mean_pair += desk.test_accuracy(desk.train(false, false, 1));
    mean_triplet += desk.test_accuracy(desk.train(true, false, 1));
    mean_full += desk.test_accuracy(desk.train(true, true, 2));
  }
  mean_pair /= n_seeds;
  mean_triplet /= n_seeds;
  mean_full /= n_seeds;

  const bool ordered = mean_pair <= mean_triplet && mean_triplet <= mean_full;
  const bool strict = mean_full >= std::max(mean_pair, mean_triplet) + 0.005;
  const bool pass = ordered && strict;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "ensemble means over %d seeds: pairwise %.4f <= triplet %.4f <= full %.4f "
                "(full ahead by %.4f)",
                n_seeds, mean_pair, mean_triplet, mean_full,
                mean_full - std::max(mean_pair, mean_triplet));
  report(5, pass, detail);
  CHECK(ordered);
  CHECK(strict);
}

TEST_CASE("criterion 6: votes are detector-invariant, interactions are not") {
  Timer timer;
  const size_t pool = 20;
  const std::vector<std::string> models = leaderboard_names(pool);
  std::vector<double> planted;
  for (size_t i = 0; i < pool; ++i) {
    planted.push_back(1.5 - 3.0 * static_cast<double>(i) / static_cast<double>(pool - 1));
  }
  const auto log = testsupport::make_battle_log(models, planted, 20000, 0.0, 99);

  const std::vector<double> accuracies = {0.6, 0.7, 0.85, 0.95};
  std::vector<double> mean_votes, mean_interactions;
  bool all_reached = true;
  for (const double accuracy : accuracies) {
    double votes = 0.0, interactions = 0.0;
    for (int s = 0; s < 20; ++s) {
      AttackConfig config;
      config.target = "m05";  // promote rank 6 -> 5
      config.objective = {ObjectiveKind::kPromoteTo, 5};
      config.detector_accuracy = accuracy;
      config.max_interactions = 400000;
      config.seed = 4000 + static_cast<uint64_t>(s);
      const SimulationReport run = run_simulation(log, config);
      votes += static_cast<double>(run.adversarial_votes);
      interactions += static_cast<double>(run.interactions);
      all_reached &= run.reached;
    }
    mean_votes.push_back(votes / 20.0);
    mean_interactions.push_back(interactions / 20.0);
  }

  const double votes_lo = *std::min_element(mean_votes.begin(), mean_votes.end());
  const double votes_hi = *std::max_element(mean_votes.begin(), mean_votes.end());
  const double votes_mean = (mean_votes[0] + mean_votes[1] + mean_votes[2] + mean_votes[3]) / 4.0;
  const double vote_range = (votes_hi - votes_lo) / votes_mean;
  bool decreasing = true;
  for (size_t i = 0; i + 1 < mean_interactions.size(); ++i) {
    decreasing &= mean_interactions[i] > mean_interactions[i + 1];
  }
  const double reduction = 1.0 - mean_interactions.back() / mean_interactions.front();
  const double elapsed = timer.seconds();

  const bool pass =
      all_reached && vote_range < 0.10 && decreasing && reduction >= 0.25 && elapsed < 300.0;
  char detail[240];
  std::snprintf(detail, sizeof(detail),
                "mean votes %.0f..%.0f (relative range %.1f%%), interactions %.0f -> %.0f "
                "(%.0f%% reduction, strictly decreasing: %s), %.0fs",
                votes_lo, votes_hi, 100.0 * vote_range, mean_interactions.front(),
                mean_interactions.back(), 100.0 * reduction, decreasing ? "yes" : "no", elapsed);
  report(6, pass, detail);
  CHECK(all_reached);
  CHECK(vote_range < 0.10);
  CHECK(decreasing);
  CHECK(reduction >= 0.25);
  CHECK(elapsed < 300.0);
}

TEST_CASE("criterion 7: demotion is far cheaper than promotion at the top") {
  const size_t pool = 20;
  const std::vector<std::string> models = leaderboard_names(pool);
  // Top-2 gap of 0.08 nats (about 14 Elo points), both far above the pack,
  // matching the shape of the reconstructed leaderboard's top ranks.
  std::vector<double> planted = {2.0, 1.92};
  for (size_t i = 2; i < pool; ++i) {
    planted.push_back(0.3 - 2.3 * static_cast<double>(i - 2) / static_cast<double>(pool - 3));
  }
  const auto log = testsupport::make_battle_log(models, planted, 150000, 0.0, 77);

  double demote_votes = 0.0, promote_votes = 0.0;
  bool all_reached = true;
  for (int s = 0; s < 20; ++s) {
    AttackConfig demote;
    demote.target = "m00";
    demote.objective = {ObjectiveKind::kDemoteTo, 2};
    demote.detector_accuracy = 0.951;
    demote.max_interactions = 600000;
    demote.seed = 7000 + static_cast<uint64_t>(s);
    const SimulationReport down = run_simulation(log, demote);
    demote_votes += static_cast<double>(down.adversarial_votes);
    all_reached &= down.reached;

    AttackConfig promote;
    promote.target = "m01";
    promote.objective = {ObjectiveKind::kPromoteTo, 1};
    promote.detector_accuracy = 0.951;
    promote.max_interactions = 600000;
    promote.seed = 7500 + static_cast<uint64_t>(s);
    const SimulationReport up = run_simulation(log, promote);
    promote_votes += static_cast<double>(up.adversarial_votes);
    all_reached &= up.reached;
  }
  demote_votes /= 20.0;
  promote_votes /= 20.0;

  const bool pass = all_reached && promote_votes >= 5.0 * demote_votes;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "mean votes: demote #1->#2 %.1f vs promote #2->#1 %.1f (ratio %.1fx)",
                demote_votes, promote_votes, promote_votes / demote_votes);
  report(7, pass, detail);
  CHECK(all_reached);
  CHECK(promote_votes >= 5.0 * demote_votes);
}

TEST_CASE("criterion 8: the aggressive policy dominates the passive one") {
  const size_t pool = 20;
  const std::vector<std::string> models = leaderboard_names(pool);
  std::vector<double> planted;
  for (size_t i = 0; i < pool; ++i) {
    planted.push_back(1.5 - 3.0 * static_cast<double>(i) / static_cast<double>(pool - 1));
  }
  const auto log = testsupport::make_battle_log(models, planted, 20000, 0.0, 55);

  bool dominated = true;
  bool all_reached = true;
  double best_multirank_reduction = 0.0;
  std::string detail = "rank 6 ->";
  for (const int objective_rank : {5, 4, 3}) {
    double passive = 0.0, aggressive = 0.0;
    for (int s = 0; s < 20; ++s) {
      AttackConfig config;
      config.target = "m05";
      config.objective = {ObjectiveKind::kPromoteTo, objective_rank};
      config.detector_accuracy = 0.951;
      config.max_interactions = 600000;
      config.seed = 8000 + static_cast<uint64_t>(s);
      const SimulationReport p = run_simulation(log, config);
      config.policy = PolicyKind::kAggressive;
      const SimulationReport a = run_simulation(log, config);
      passive += static_cast<double>(p.interactions);
      aggressive += static_cast<double>(a.interactions);
      all_reached &= p.reached && a.reached;
    }
    passive /= 20.0;
    aggressive /= 20.0;
    dominated &= aggressive <= passive;
    const double reduction = 1.0 - aggressive / passive;
    if (objective_rank <= 4) {  // multi-rank promotion
      best_multirank_reduction = std::max(best_multirank_reduction, reduction);
    }
    char cell[80];
    std::snprintf(cell, sizeof(cell), " %d: %.0f vs %.0f (-%.0f%%)", objective_rank, passive,
                  aggressive, 100.0 * reduction);
    detail += cell;
  }
  const bool pass = all_reached && dominated && best_multirank_reduction >= 0.30;
  report(8, pass, detail + " [passive vs aggressive interactions]");
  CHECK(all_reached);
  CHECK(dominated);
  CHECK(best_multirank_reduction >= 0.30);
}

namespace {

// Trains one baseline kind on the corpus' train split and returns macro
// test accuracy over all non-target models.
double baseline_accuracy(const ResponseCorpus& corpus, const SplitCorpus& split,
                         const std::string& target, BaselineKind kind) {
  std::vector<std::string> texts;
  std::vector<int> labels;
  for (const auto& qid : split.train) {
    for (const auto& model : corpus.models()) {
      texts.push_back(corpus.find(qid, model)->response);
      labels.push_back(model == target ? 1 : 0);
    }
  }
  const BaselineFeaturizer featurizer = BaselineFeaturizer::fit(kind, texts);
  std::vector<SparseVector> features;
  features.reserve(texts.size());
  for (const auto& t : texts) features.push_back(featurizer.transform(t));
  const LinearModel model = train_logreg(features, labels, {1.0, 2000, 1e-8, 100});
  const EvalReport rep = full_report(
      [&](const std::string&, const std::string& response) {
        return score(model, featurizer.transform(response));
      },
      corpus, split.test, target, 0);
  return rep.macro_accuracy;
}

}  // namespace

TEST_CASE("criterion 9: baseline detectors behave on planted and null corpora") {
  // Planted signal: target responses about 3x longer.
  testsupport::SynthConfig shifted;
  shifted.n_queries = 300;
  shifted.n_families = 6;
  shifted.seed = 910;
  shifted.length_scales.assign(12, 1.0);
  shifted.length_scales[0] = 3.0;  // m0a
  const ResponseCorpus shifted_corpus = testsupport::make_corpus(shifted);
  const SplitCorpus shifted_split = split_corpus(shifted_corpus, 42, 180, 60, 60);
  const double length_acc =
      baseline_accuracy(shifted_corpus, shifted_split, "m0a", BaselineKind::kLengthWord);

  // Identically distributed corpus: every baseline near chance over >= 1000
  // scored pairs (100 test queries x 11 opponents).
  testsupport::SynthConfig null_config;
  null_config.n_queries = 300;
  null_config.n_families = 6;
  null_config.iid = true;
  null_config.seed = 911;
  const ResponseCorpus null_corpus = testsupport::make_corpus(null_config);
  const SplitCorpus null_split = split_corpus(null_corpus, 42, 150, 50, 100);
  bool null_ok = true;
  std::string null_detail;
  for (const BaselineKind kind : {BaselineKind::kLengthWord, BaselineKind::kLengthChar,
                                  BaselineKind::kBow, BaselineKind::kTfidf}) {
    const double acc = baseline_accuracy(null_corpus, null_split, "m0a", kind);
    null_ok &= acc >= 0.45 && acc <= 0.55;
    char cell[48];
    std::snprintf(cell, sizeof(cell), " %s %.3f", to_string(kind).c_str(), acc);
    null_detail += cell;
  }

  // AUROC equals a brute-force pair count on 50 random score sets.
  SplitMix64 rng(912);
  bool auroc_exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pos, neg;
    const size_t n_pos = 1 + rng.below(40);
    const size_t n_neg = 1 + rng.below(40);
    for (size_t i = 0; i < n_pos; ++i) pos.push_back(static_cast<double>(rng.below(12)) / 3.0);
    for (size_t i = 0; i < n_neg; ++i) neg.push_back(static_cast<double>(rng.below(12)) / 3.0);
    double wins = 0.0;
    for (const double p : pos) {
      for (const double n : neg) wins += p > n ? 1.0 : p == n ? 0.5 : 0.0;
    }
    const double brute = wins / static_cast<double>(n_pos * n_neg);
    if (std::abs(auroc(pos, neg) - brute) > 1e-12) auroc_exact = false;
  }

  const bool pass = length_acc > 0.9 && null_ok && auroc_exact;
  char detail[240];
  std::snprintf(detail, sizeof(detail),
                "length-word on shifted corpus %.3f; null corpus accuracies:%s; AUROC matches "
                "brute force: %s",
                length_acc, null_detail.c_str(), auroc_exact ? "yes" : "no");
  report(9, pass, detail);
  CHECK(length_acc > 0.9);
  CHECK(null_ok);
  CHECK(auroc_exact);
}

TEST_CASE("criterion 10: evaluation protocol scores exactly 2200 pairs") {
  testsupport::SynthConfig config;
  config.n_queries = 1400;
  config.n_families = 6;  // 12 models: 11 opponents for the target
  config.seed = 1010;
  const ResponseCorpus corpus = testsupport::make_corpus(config);
  const SplitCorpus split = split_corpus(corpus, 42, 1000, 200, 200);

  const ScoreFn detector = [](const std::string&, const std::string& response) {
    return static_cast<double>(fnv1a64(response) % 100003);
  };
  const EvalReport rep = full_report(detector, corpus, split.test, "m0a", 0);

  double acc_sum = 0.0, auc_sum = 0.0;
  for (const auto& [model, res] : rep.per_opponent) {
    acc_sum += res.accuracy;
    auc_sum += res.auroc;
  }
  const double n = static_cast<double>(rep.per_opponent.size());
  const double acc_err = std::abs(rep.macro_accuracy - acc_sum / n);
  const double auc_err = std::abs(rep.macro_auroc - auc_sum / n);

  const bool pass = rep.scored_pairs == 2200 && rep.per_opponent.size() == 11 &&
                    acc_err <= 1e-12 && auc_err <= 1e-12;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "%zu scored pairs over %zu opponents; macro deviations %.1e / %.1e",
                rep.scored_pairs, rep.per_opponent.size(), acc_err, auc_err);
  report(10, pass, detail);
  CHECK(rep.scored_pairs == 2200);
  CHECK(rep.per_opponent.size() == 11);
  CHECK(acc_err <= 1e-12);
  CHECK(auc_err <= 1e-12);
}
