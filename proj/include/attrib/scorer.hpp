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

#ifndef ATTRIB_SCORER_HPP_
#define ATTRIB_SCORER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "attrib/corpus.hpp"
#include "attrib/featurize.hpp"
#include "attrib/rng.hpp"

namespace attrib {

// The detector core: a linear scorer f(q,y) = theta . phi(q,y) trained with
// pairwise and weighted triplet preference losses, margin-based task
// reassignment, and a staged curriculum over negatives of increasing
// difficulty. The scorer family is linear over style features so gradients
// are exact; the loss and trainer code only touch value + gradient, so a
// richer scorer can be swapped in behind the same surface.

struct ScorerFeatureConfig {
  uint32_t hash_dim = 1024;  // hashed character n-gram block size
  int char_ngram = 3;
  bool include_query = false;
};

// phi(q,y): a standardized scalar block (lengths, word shape, character
// class ratios) followed by an L2-normalized hashed character n-gram
// frequency block; optionally the same layout again for the query text.
// Standardization statistics are fitted once on training responses and are
// part of the persisted feature spec.
class ScorerFeatureMap {
 public:
  static constexpr size_t kScalarCount = 8;

  ScorerFeatureMap() = default;

  static ScorerFeatureMap fit(const ScorerFeatureConfig& config,
                              const std::vector<std::string>& train_responses,
                              const std::vector<std::string>& train_queries = {});

  size_t dimension() const;
  std::vector<double> features(const std::string& query, const std::string& response) const;

  // Versioned identifier covering layout-affecting configuration.
  std::string spec_id() const;

  const ScorerFeatureConfig& config() const { return config_; }
  const Standardizer& response_standardizer() const { return response_std_; }
  const Standardizer& query_standardizer() const { return query_std_; }

  static std::vector<double> raw_scalars(const std::string& text);

 private:
  ScorerFeatureConfig config_;
  Standardizer response_std_;
  Standardizer query_std_;

  void append_block(const std::string& text, const Standardizer& std,
                    std::vector<double>& out) const;

  friend ScorerFeatureMap feature_map_from_parts(ScorerFeatureConfig, Standardizer, Standardizer);
};

class LinearScorer {
 public:
  LinearScorer() = default;
  explicit LinearScorer(ScorerFeatureMap map)
      : map_(std::move(map)), theta_(map_.dimension(), 0.0) {}

  double score(const std::string& query, const std::string& response) const;
  double score_features(std::span<const double> phi) const;

  const ScorerFeatureMap& feature_map() const { return map_; }
  const std::vector<double>& theta() const { return theta_; }
  std::vector<double>& mutable_theta() { return theta_; }

 private:
  ScorerFeatureMap map_;
  std::vector<double> theta_;
};

// -ln sigmoid(s_w - s_l), computed as softplus(-(s_w - s_l)) so it stays
// finite and accurate for |s_w - s_l| > 30.
double pref_loss(double s_w, double s_l);

// d pref_loss / d (s_w - s_l) = -sigmoid(-(s_w - s_l)).
double pref_loss_ddelta(double s_w, double s_l);

struct Lambdas {
  double l1 = 0.3;
  double l2 = 0.3;
  double l3 = 1.0;
};

// l1*pref(s_star, s_alpha) + l2*pref(s_alpha, s_o) + l3*pref(s_star, s_o):
// the target outranks the interpolated negative, which outranks the
// other-model negative.
double triplet_loss(double s_star, double s_alpha, double s_o, const Lambdas& lambdas);

// Discrimination margin f(q, y_star) - f(q, y_o) under the current theta.
double margin(const LinearScorer& scorer, const std::string& query,
              const std::string& y_star, const std::string& y_o);

// Margin-based reassignment: m < 0 falls back to the pairwise task
// (loss l3 * pref(s_star, s_o)); m >= 0 keeps the triplet task.
void assign_tasks(std::vector<TripletExample>& dataset, const LinearScorer& scorer);

struct StageConfig {
  double alpha = 0.5;
  double learning_rate = 0.3;
  int epochs = 5;
};

struct CurriculumConfig {
  std::vector<StageConfig> stages;  // alphas strictly increasing
  Lambdas lambdas;
  int warmup_steps = 100;  // linear warmup, then cosine decay per stage
  int batch_size = 8;
  bool use_triplet = true;   // off: pairwise loss only (no synthesis)
  bool use_adaptive = true;  // off: every example keeps the triplet task

  void validate() const;  // throws std::invalid_argument on violations
};

// Mean loss and gradient of the assigned per-example losses over a batch.
// For the linear scorer d pref/d theta = -sigmoid(-delta) * (phi_w - phi_l).
double loss_gradient(std::span<const TripletExample> batch, const LinearScorer& scorer,
                     const Lambdas& lambdas, bool use_triplet,
                     std::vector<double>& gradient_out);

struct EpochMetrics {
  int stage = 0;
  int epoch = 0;
  double mean_loss = 0.0;
  double val_accuracy = 0.0;
  double val_auroc = 0.0;
  double frac_pair_assigned = 0.0;
};

struct ValMetrics {
  double accuracy = 0.0;
  double auroc = 0.0;
};

using ValEvalFn = std::function<ValMetrics(const LinearScorer&)>;

struct StageResult {
  double best_val_auroc = 0.0;
  int best_epoch = 0;
  std::vector<EpochMetrics> epochs;
};

// Minibatch gradient descent on the mean assigned loss. Tasks are
// reassigned at the start of every epoch; the learning rate follows linear
// warmup then cosine decay over the stage's step budget. On return the
// scorer holds the epoch checkpoint with the highest validation AUROC
// (earliest epoch on ties). Throws on a non-finite loss, reporting the
// learning rate and batch index.
StageResult train_stage(std::vector<TripletExample>& dataset, LinearScorer& scorer,
                        const StageConfig& stage, const CurriculumConfig& config,
                        const ValEvalFn& val_eval, SplitMix64& rng, int stage_index = 0);

// Produces the stage's training set for a given interpolation difficulty;
// wired to copy-model synthesis by the caller.
using SynthFn = std::function<std::vector<TripletExample>(double alpha)>;

struct CurriculumResult {
  std::vector<EpochMetrics> log;
};

// For each stage: synthesize the stage dataset, then train continuing from
// the previous stage's best checkpoint. The scorer ends at the final
// stage's best checkpoint.
CurriculumResult run_curriculum(const CurriculumConfig& config, LinearScorer& scorer,
                                const SynthFn& synth, const ValEvalFn& val_eval,
                                SplitMix64& rng);

// Training log: CSV epoch,stage,mean_loss,val_accuracy,val_auroc,frac_pair_assigned.
void write_training_log_csv(const std::vector<EpochMetrics>& log, const std::string& path);

// Checkpoint: versioned JSON with the feature spec (including fitted
// standardizer statistics) and theta as 64-bit reals.
void save_scorer(const LinearScorer& scorer, const std::string& path);
LinearScorer load_scorer(const std::string& path);

}  // namespace attrib

#endif  // ATTRIB_SCORER_HPP_
