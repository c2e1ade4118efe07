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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace attrib {

std::vector<double> ScorerFeatureMap::raw_scalars(const std::string& text) {
  const double chars = length_feature(text, LengthUnit::kChar);
  const double words = length_feature(text, LengthUnit::kWord);
  size_t digits = 0, punct = 0, upper = 0, space = 0;
  std::set<char> distinct;
  for (const char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isdigit(uc)) ++digits;
    if (std::ispunct(uc)) ++punct;
    if (std::isupper(uc)) ++upper;
    if (std::isspace(uc)) ++space;
    distinct.insert(c);
  }
  const double len = std::max<double>(1.0, static_cast<double>(text.size()));
  return {
      std::log1p(chars),
      std::log1p(words),
      words > 0.0 ? chars / words : 0.0,
      static_cast<double>(digits) / len,
      static_cast<double>(punct) / len,
      static_cast<double>(upper) / len,
      static_cast<double>(space) / len,
      static_cast<double>(distinct.size()) / len,
  };
}

ScorerFeatureMap ScorerFeatureMap::fit(const ScorerFeatureConfig& config,
                                       const std::vector<std::string>& train_responses,
                                       const std::vector<std::string>& train_queries) {
  if (config.hash_dim == 0) throw std::invalid_argument("hash_dim must be > 0");
  if (config.char_ngram < 1) throw std::invalid_argument("char_ngram must be >= 1");
  if (train_responses.empty()) throw std::invalid_argument("no training responses");
  ScorerFeatureMap map;
  map.config_ = config;
  std::vector<std::vector<double>> rows;
  rows.reserve(train_responses.size());
  for (const auto& text : train_responses) rows.push_back(raw_scalars(text));
  map.response_std_ = Standardizer::fit(rows);
  if (config.include_query) {
    if (train_queries.empty()) throw std::invalid_argument("include_query needs training queries");
    rows.clear();
    for (const auto& text : train_queries) rows.push_back(raw_scalars(text));
    map.query_std_ = Standardizer::fit(rows);
  }
  return map;
}

size_t ScorerFeatureMap::dimension() const {
  const size_t block = kScalarCount + config_.hash_dim;
  return config_.include_query ? 2 * block : block;
}

void ScorerFeatureMap::append_block(const std::string& text, const Standardizer& std_,
                                    std::vector<double>& out) const {
  std::vector<double> scalars = raw_scalars(text);
  std_.transform_inplace(scalars);
  // Scale the standardized scalars so the block's typical norm matches the
  // unit-norm hashed block; otherwise scalar outliers dominate the gradient.
  const double scale = 1.0 / std::sqrt(static_cast<double>(kScalarCount));
  for (auto& s : scalars) s *= scale;
  out.insert(out.end(), scalars.begin(), scalars.end());

  // Hashed character n-gram term frequencies, L2-normalized.
  const size_t base = out.size();
  out.resize(base + config_.hash_dim, 0.0);
  const auto n = static_cast<size_t>(config_.char_ngram);
  if (text.size() >= n) {
    for (size_t i = 0; i + n <= text.size(); ++i) {
      const uint64_t h = fnv1a64(std::string_view(text).substr(i, n));
      out[base + h % config_.hash_dim] += 1.0;
    }
    double norm = 0.0;
    for (size_t i = base; i < out.size(); ++i) norm += out[i] * out[i];
    if (norm > 0.0) {
      norm = 1.0 / std::sqrt(norm);
      for (size_t i = base; i < out.size(); ++i) out[i] *= norm;
    }
  }
}

std::vector<double> ScorerFeatureMap::features(const std::string& query,
                                               const std::string& response) const {
  std::vector<double> phi;
  phi.reserve(dimension());
  append_block(response, response_std_, phi);
  if (config_.include_query) append_block(query, query_std_, phi);
  return phi;
}

std::string ScorerFeatureMap::spec_id() const {
  std::ostringstream id;
  id << "linear-style-v1:h=" << config_.hash_dim << ",n=" << config_.char_ngram
     << ",q=" << (config_.include_query ? 1 : 0);
  return id.str();
}

ScorerFeatureMap feature_map_from_parts(ScorerFeatureConfig config, Standardizer response_std,
                                        Standardizer query_std) {
  ScorerFeatureMap map;
  map.config_ = config;
  map.response_std_ = std::move(response_std);
  map.query_std_ = std::move(query_std);
  return map;
}

double LinearScorer::score_features(std::span<const double> phi) const {
  double s = 0.0;
  for (size_t i = 0; i < phi.size(); ++i) s += theta_[i] * phi[i];
  return s;
}

double LinearScorer::score(const std::string& query, const std::string& response) const {
  return score_features(map_.features(query, response));
}

double pref_loss(double s_w, double s_l) {
  const double delta = s_w - s_l;
  // softplus(-delta)
  if (delta >= 0.0) return std::log1p(std::exp(-delta));
  return -delta + std::log1p(std::exp(delta));
}

double pref_loss_ddelta(double s_w, double s_l) {
  const double delta = s_w - s_l;
  if (delta >= 0.0) {
    const double e = std::exp(-delta);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(delta));
}

double triplet_loss(double s_star, double s_alpha, double s_o, const Lambdas& lambdas) {
  double loss = 0.0;
  if (lambdas.l1 != 0.0) loss += lambdas.l1 * pref_loss(s_star, s_alpha);
  if (lambdas.l2 != 0.0) loss += lambdas.l2 * pref_loss(s_alpha, s_o);
  if (lambdas.l3 != 0.0) loss += lambdas.l3 * pref_loss(s_star, s_o);
  return loss;
}

double margin(const LinearScorer& scorer, const std::string& query, const std::string& y_star,
              const std::string& y_o) {
  return scorer.score(query, y_star) - scorer.score(query, y_o);
}

void assign_tasks(std::vector<TripletExample>& dataset, const LinearScorer& scorer) {
  for (auto& example : dataset) {
    const double m = margin(scorer, example.query, example.y_star, example.y_o);
    example.assigned_task = m < 0.0 ? TaskKind::kPair : TaskKind::kTriplet;
  }
}

void CurriculumConfig::validate() const {
  if (stages.empty()) throw std::invalid_argument("curriculum needs at least one stage");
  for (size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    if (!(s.alpha >= 0.0 && s.alpha <= 1.0)) throw std::invalid_argument("stage alpha outside [0,1]");
    if (i > 0 && !(s.alpha > stages[i - 1].alpha)) {
      throw std::invalid_argument("stage alphas must strictly increase");
    }
    if (s.learning_rate <= 0.0) throw std::invalid_argument("learning rate must be > 0");
    if (s.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  }
  if (lambdas.l1 < 0.0 || lambdas.l2 < 0.0 || lambdas.l3 < 0.0) {
    throw std::invalid_argument("lambda components must be >= 0");
  }
  if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

namespace {

void axpy(double a, std::span<const double> x, std::vector<double>& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace

double loss_gradient(std::span<const TripletExample> batch, const LinearScorer& scorer,
                     const Lambdas& lambdas, bool use_triplet, std::vector<double>& gradient_out) {
  const auto& map = scorer.feature_map();
  gradient_out.assign(map.dimension(), 0.0);
  double loss = 0.0;
  for (const auto& ex : batch) {
    const std::vector<double> phi_star = map.features(ex.query, ex.y_star);
    const std::vector<double> phi_o = map.features(ex.query, ex.y_o);
    const double s_star = scorer.score_features(phi_star);
    const double s_o = scorer.score_features(phi_o);

    if (use_triplet && ex.assigned_task == TaskKind::kTriplet) {
      const std::vector<double> phi_alpha = map.features(ex.query, ex.y_alpha);
      const double s_alpha = scorer.score_features(phi_alpha);
      loss += triplet_loss(s_star, s_alpha, s_o, lambdas);
      const double c1 = lambdas.l1 * pref_loss_ddelta(s_star, s_alpha);
      const double c2 = lambdas.l2 * pref_loss_ddelta(s_alpha, s_o);
      const double c3 = lambdas.l3 * pref_loss_ddelta(s_star, s_o);
      axpy(c1 + c3, phi_star, gradient_out);
      axpy(c2 - c1, phi_alpha, gradient_out);
      axpy(-c2 - c3, phi_o, gradient_out);
    } else {
      loss += lambdas.l3 * pref_loss(s_star, s_o);
      const double c = lambdas.l3 * pref_loss_ddelta(s_star, s_o);
      axpy(c, phi_star, gradient_out);
      axpy(-c, phi_o, gradient_out);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : gradient_out) g *= inv;
  return loss * inv;
}

StageResult train_stage(std::vector<TripletExample>& dataset, LinearScorer& scorer,
                        const StageConfig& stage, const CurriculumConfig& config,
                        const ValEvalFn& val_eval, SplitMix64& rng, int stage_index) {
  if (dataset.empty()) throw std::invalid_argument("train_stage: empty dataset");
  const size_t n = dataset.size();
  const auto batch_size = static_cast<size_t>(config.batch_size);
  const size_t steps_per_epoch = (n + batch_size - 1) / batch_size;
  const size_t total_steps = steps_per_epoch * static_cast<size_t>(stage.epochs);

  StageResult result;
  std::vector<double> best_theta = scorer.theta();
  double best_auroc = -1.0;
  int best_epoch = 0;

  std::vector<double> gradient;
  size_t step = 0;
  for (int epoch = 1; epoch <= stage.epochs; ++epoch) {
    if (config.use_triplet && config.use_adaptive) {
      assign_tasks(dataset, scorer);
    } else {
      const TaskKind task = config.use_triplet ? TaskKind::kTriplet : TaskKind::kPair;
      for (auto& ex : dataset) ex.assigned_task = task;
    }
    size_t pair_count = 0;
    for (const auto& ex : dataset) pair_count += ex.assigned_task == TaskKind::kPair ? 1 : 0;

    fisher_yates(dataset, rng);

    double loss_sum = 0.0;
    for (size_t begin = 0; begin < n; begin += batch_size) {
      const size_t len = std::min(batch_size, n - begin);
      const std::span<const TripletExample> batch(dataset.data() + begin, len);
      const double batch_loss =
          loss_gradient(batch, scorer, config.lambdas, config.use_triplet, gradient);

      double lr = stage.learning_rate;
      if (config.warmup_steps > 0 && step < static_cast<size_t>(config.warmup_steps)) {
        lr *= static_cast<double>(step + 1) / static_cast<double>(config.warmup_steps);
      } else {
        const auto warm = static_cast<double>(config.warmup_steps);
        const double span = std::max(1.0, static_cast<double>(total_steps) - warm);
        const double progress = (static_cast<double>(step) - warm) / span;
        lr *= 0.5 * (1.0 + std::cos(progress * 3.14159265358979323846));
      }

      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "non-finite loss in stage " << stage_index << " epoch " << epoch << " at batch "
            << begin / batch_size << " (lr=" << lr << ")";
        throw std::runtime_error(msg.str());
      }

      auto& theta = scorer.mutable_theta();
      for (size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * gradient[i];
      loss_sum += batch_loss * static_cast<double>(len);
      ++step;
    }

    const ValMetrics val = val_eval(scorer);
    EpochMetrics metrics;
    metrics.stage = stage_index;
    metrics.epoch = epoch;
    metrics.mean_loss = loss_sum / static_cast<double>(n);
    metrics.val_accuracy = val.accuracy;
    metrics.val_auroc = val.auroc;
    metrics.frac_pair_assigned = static_cast<double>(pair_count) / static_cast<double>(n);
    result.epochs.push_back(metrics);

    if (val.auroc > best_auroc) {
      best_auroc = val.auroc;
      best_theta = scorer.theta();
      best_epoch = epoch;
    }
  }

  scorer.mutable_theta() = best_theta;
  result.best_val_auroc = best_auroc;
  result.best_epoch = best_epoch;
  return result;
}

CurriculumResult run_curriculum(const CurriculumConfig& config, LinearScorer& scorer,
                                const SynthFn& synth, const ValEvalFn& val_eval,
                                SplitMix64& rng) {
  config.validate();
  CurriculumResult result;
  for (size_t k = 0; k < config.stages.size(); ++k) {
    std::vector<TripletExample> dataset = synth(config.stages[k].alpha);
    const StageResult stage_result = train_stage(dataset, scorer, config.stages[k], config,
                                                 val_eval, rng, static_cast<int>(k + 1));
    result.log.insert(result.log.end(), stage_result.epochs.begin(), stage_result.epochs.end());
  }
  return result;
}

void write_training_log_csv(const std::vector<EpochMetrics>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log: " + path);
  out << "epoch,stage,mean_loss,val_accuracy,val_auroc,frac_pair_assigned\n";
  out.precision(17);
  for (const auto& m : log) {
    out << m.epoch << ',' << m.stage << ',' << m.mean_loss << ',' << m.val_accuracy << ','
        << m.val_auroc << ',' << m.frac_pair_assigned << '\n';
  }
}

void save_scorer(const LinearScorer& scorer, const std::string& path) {
  const auto& map = scorer.feature_map();
  nlohmann::json j;
  j["format"] = "attrib-scorer-v1";
  j["feature_spec"] = {
      {"id", map.spec_id()},
      {"hash_dim", map.config().hash_dim},
      {"char_ngram", map.config().char_ngram},
      {"include_query", map.config().include_query},
      {"response_standardizer",
       {{"mean", map.response_standardizer().mean()},
        {"std", map.response_standardizer().stddev()}}},
  };
  if (map.config().include_query) {
    j["feature_spec"]["query_standardizer"] = {{"mean", map.query_standardizer().mean()},
                                               {"std", map.query_standardizer().stddev()}};
  }
  j["theta"] = scorer.theta();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scorer checkpoint: " + path);
  out << j.dump(2) << '\n';
}

LinearScorer load_scorer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scorer checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "attrib-scorer-v1") {
    throw std::runtime_error("unsupported scorer checkpoint format in " + path);
  }
  const auto& spec = j.at("feature_spec");
  ScorerFeatureConfig config;
  config.hash_dim = spec.at("hash_dim").get<uint32_t>();
  config.char_ngram = spec.at("char_ngram").get<int>();
  config.include_query = spec.at("include_query").get<bool>();
  const auto& rs = spec.at("response_standardizer");
  Standardizer response_std = Standardizer::from_moments(
      rs.at("mean").get<std::vector<double>>(), rs.at("std").get<std::vector<double>>());
  Standardizer query_std;
  if (config.include_query) {
    const auto& qs = spec.at("query_standardizer");
    query_std = Standardizer::from_moments(qs.at("mean").get<std::vector<double>>(),
                                           qs.at("std").get<std::vector<double>>());
  }
  LinearScorer scorer(feature_map_from_parts(config, std::move(response_std), std::move(query_std)));
  scorer.mutable_theta() = j.at("theta").get<std::vector<double>>();
  if (scorer.theta().size() != scorer.feature_map().dimension()) {
    throw std::runtime_error("theta dimension does not match feature spec in " + path);
  }
  return scorer;
}

}  // namespace attrib
