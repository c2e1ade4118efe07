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

#include "attrib/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "attrib/rng.hpp"
#include "json.hpp"

namespace attrib {

namespace {

double softplus(double x) {
  if (x >= 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sparse_dot(const SparseVector& x, std::span<const double> w) {
  double s = 0.0;
  for (const auto& [idx, value] : x.entries()) s += w[idx] * value;
  return s;
}

// Mean logistic loss + ||w||^2/(2*c*n); the last coordinate of `params` is
// the unregularized bias. Rows are visited in `order` so the summation
// sequence (and thus near-tie rounding) follows the training seed.
struct LogRegProblem {
  const std::vector<SparseVector>& features;
  const std::vector<int>& labels;
  const std::vector<size_t>& order;
  double c;

  size_t weight_dim() const { return features.front().dimension(); }

  double eval(std::span<const double> params, std::vector<double>& grad) const {
    const size_t dim = weight_dim();
    const double n = static_cast<double>(features.size());
    grad.assign(dim + 1, 0.0);
    double loss = 0.0;
    for (const size_t i : order) {
      const double m = sparse_dot(features[i], params.first(dim)) + params[dim];
      const double z = labels[i] == 1 ? 1.0 : -1.0;
      loss += softplus(-z * m);
      const double coef = -z * sigmoid(-z * m) / n;
      for (const auto& [idx, value] : features[i].entries()) grad[idx] += coef * value;
      grad[dim] += coef;
    }
    loss /= n;
    const double reg = 1.0 / (c * n);
    double sq = 0.0;
    for (size_t j = 0; j < dim; ++j) {
      sq += params[j] * params[j];
      grad[j] += reg * params[j];
    }
    return loss + 0.5 * reg * sq;
  }
};

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

// L-BFGS (memory 10) with Armijo backtracking. Deterministic: no
// randomness beyond the caller-provided start point and row order.
std::vector<double> lbfgs_minimize(const LogRegProblem& problem, std::vector<double> x,
                                   int max_iter, double tol) {
  constexpr size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;

  std::vector<double> grad;
  double fx = problem.eval(x, grad);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  std::vector<double> direction(x.size()), x_new(x.size()), grad_new;
  for (int iter = 0; iter < max_iter && inf_norm(grad) >= tol; ++iter) {
    // Two-loop recursion.
    direction = grad;
    std::vector<double> alpha(s_hist.size());
    for (size_t k = s_hist.size(); k-- > 0;) {
      double dot_sd = 0.0;
      for (size_t j = 0; j < x.size(); ++j) dot_sd += s_hist[k][j] * direction[j];
      alpha[k] = rho_hist[k] * dot_sd;
      for (size_t j = 0; j < x.size(); ++j) direction[j] -= alpha[k] * y_hist[k][j];
    }
    if (!s_hist.empty()) {
      double yy = 0.0, sy = 0.0;
      for (size_t j = 0; j < x.size(); ++j) {
        yy += y_hist.back()[j] * y_hist.back()[j];
        sy += s_hist.back()[j] * y_hist.back()[j];
      }
      const double scale = sy / std::max(yy, 1e-300);
      for (auto& d : direction) d *= scale;
    }
    for (size_t k = 0; k < s_hist.size(); ++k) {
      double dot_yd = 0.0;
      for (size_t j = 0; j < x.size(); ++j) dot_yd += y_hist[k][j] * direction[j];
      const double beta = rho_hist[k] * dot_yd;
      for (size_t j = 0; j < x.size(); ++j) direction[j] += s_hist[k][j] * (alpha[k] - beta);
    }
    for (auto& d : direction) d = -d;

    double dir_dot_grad = 0.0;
    for (size_t j = 0; j < x.size(); ++j) dir_dot_grad += direction[j] * grad[j];
    if (dir_dot_grad >= 0.0) {  // not a descent direction; restart from steepest
      dir_dot_grad = 0.0;
      for (size_t j = 0; j < x.size(); ++j) {
        direction[j] = -grad[j];
        dir_dot_grad -= grad[j] * grad[j];
      }
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = s_hist.empty() ? 1.0 / (1.0 + inf_norm(grad)) : 1.0;
    double fx_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (size_t j = 0; j < x.size(); ++j) x_new[j] = x[j] + step * direction[j];
      fx_new = problem.eval(x_new, grad_new);
      if (fx_new <= fx + kArmijo * step * dir_dot_grad) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further progress possible at double precision

    std::vector<double> s(x.size()), y(x.size());
    double sy = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
      s[j] = x_new[j] - x[j];
      y[j] = grad_new[j] - grad[j];
      sy += s[j] * y[j];
    }
    if (sy > 1e-12) {
      if (s_hist.size() == kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    x.swap(x_new);
    grad.swap(grad_new);
    fx = fx_new;
  }
  return x;
}

}  // namespace

LinearModel train_logreg(const std::vector<SparseVector>& features,
                         const std::vector<int>& labels, const LogRegConfig& config) {
  if (features.empty() || features.size() != labels.size()) {
    throw std::invalid_argument("train_logreg: features/labels size mismatch");
  }
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("train_logreg: both classes must be present");
  }
  for (const int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("train_logreg: labels must be 0 or 1");
  }

  const size_t dim = features.front().dimension();
  SplitMix64 rng(config.seed);
  std::vector<size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  fisher_yates(order, rng);

  std::vector<double> params(dim + 1);
  for (auto& p : params) p = 1e-6 * (rng.next_double() - 0.5);

  const LogRegProblem problem{features, labels, order, config.c};
  params = lbfgs_minimize(problem, std::move(params), config.max_iter, config.tol);

  LinearModel model;
  model.weights.assign(params.begin(), params.begin() + dim);
  model.bias = params[dim];
  return model;
}

double score(const LinearModel& model, const SparseVector& features) {
  return sparse_dot(features, model.weights) + model.bias;
}

double logreg_objective(const LinearModel& model, const std::vector<SparseVector>& features,
                        const std::vector<int>& labels, double c) {
  const double n = static_cast<double>(features.size());
  double loss = 0.0;
  for (size_t i = 0; i < features.size(); ++i) {
    const double m = score(model, features[i]);
    const double z = labels[i] == 1 ? 1.0 : -1.0;
    loss += softplus(-z * m);
  }
  double sq = 0.0;
  for (const double w : model.weights) sq += w * w;
  return loss / n + sq / (2.0 * c * n);
}

LinearModel select_by_val_auroc(const TrainFn& train, const ModelEvalFn& val_auroc,
                                const std::vector<uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("select_by_val_auroc: no seeds");
  LinearModel best;
  double best_score = -1.0;
  bool first = true;
  for (const uint64_t seed : seeds) {
    LinearModel model = train(seed);
    const double score = val_auroc(model);
    if (first || score > best_score) {
      best = std::move(model);
      best_score = score;
      first = false;
    }
  }
  return best;
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kLengthWord: return "length-word";
    case BaselineKind::kLengthChar: return "length-char";
    case BaselineKind::kBow: return "bow";
    case BaselineKind::kTfidf: return "tfidf";
  }
  throw std::invalid_argument("unknown baseline kind");
}

BaselineKind baseline_kind_from_string(const std::string& name) {
  if (name == "length-word") return BaselineKind::kLengthWord;
  if (name == "length-char") return BaselineKind::kLengthChar;
  if (name == "bow") return BaselineKind::kBow;
  if (name == "tfidf") return BaselineKind::kTfidf;
  throw std::invalid_argument("unknown baseline kind: " + name);
}

BaselineFeaturizer BaselineFeaturizer::fit(BaselineKind kind,
                                           const std::vector<std::string>& train_texts) {
  BaselineFeaturizer f;
  f.kind = kind;
  switch (kind) {
    case BaselineKind::kLengthWord:
    case BaselineKind::kLengthChar: {
      const LengthUnit unit =
          kind == BaselineKind::kLengthWord ? LengthUnit::kWord : LengthUnit::kChar;
      std::vector<std::vector<double>> rows;
      rows.reserve(train_texts.size());
      for (const auto& t : train_texts) rows.push_back({length_feature(t, unit)});
      f.standardizer = Standardizer::fit(rows);
      break;
    }
    case BaselineKind::kBow:
      f.vocab = fit_vocab(train_texts);
      break;
    case BaselineKind::kTfidf:
      f.vocab = fit_vocab(train_texts);
      f.idf = fit_idf(f.vocab);
      break;
  }
  return f;
}

SparseVector BaselineFeaturizer::transform(const std::string& text) const {
  switch (kind) {
    case BaselineKind::kLengthWord:
    case BaselineKind::kLengthChar: {
      const LengthUnit unit =
          kind == BaselineKind::kLengthWord ? LengthUnit::kWord : LengthUnit::kChar;
      const std::vector<double> row = standardizer.transform({{length_feature(text, unit)}});
      return SparseVector::from_sorted(1, {{0, row[0]}});
    }
    case BaselineKind::kBow:
      return bow_vector(text, vocab);
    case BaselineKind::kTfidf:
      return tfidf(bow_vector(text, vocab), idf);
  }
  throw std::invalid_argument("unknown baseline kind");
}

BaselineDetector::BaselineDetector(BaselineKind kind, LinearModel model, Vocabulary vocab,
                                   std::vector<double> idf, Standardizer standardizer)
    : kind_(kind),
      model_(std::move(model)),
      vocab_(std::move(vocab)),
      idf_(std::move(idf)),
      standardizer_(std::move(standardizer)) {}

SparseVector BaselineDetector::featurize(const std::string& response) const {
  BaselineFeaturizer f;
  f.kind = kind_;
  f.vocab = vocab_;
  f.idf = idf_;
  f.standardizer = standardizer_;
  return f.transform(response);
}

double BaselineDetector::score_text(const std::string& response) const {
  return score(model_, featurize(response));
}

void BaselineDetector::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "attrib-baseline-v1";
  j["kind"] = to_string(kind_);
  j["feature_spec"] = model_.feature_spec;
  j["weights"] = model_.weights;
  j["bias"] = model_.bias;
  if (kind_ == BaselineKind::kBow || kind_ == BaselineKind::kTfidf) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [term, col] : vocab_.index) {
      terms.push_back({term, col, vocab_.df.at(term)});
    }
    j["vocab"] = {{"ngram_lo", vocab_.ngram_lo},
                  {"ngram_hi", vocab_.ngram_hi},
                  {"min_df", vocab_.min_df},
                  {"document_count", vocab_.document_count},
                  {"terms", std::move(terms)}};
  }
  if (kind_ == BaselineKind::kTfidf) j["idf"] = idf_;
  if (kind_ == BaselineKind::kLengthWord || kind_ == BaselineKind::kLengthChar) {
    j["standardizer"] = {{"mean", standardizer_.mean()}, {"std", standardizer_.stddev()}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write baseline checkpoint: " + path);
  out << j.dump(2) << '\n';
}

BaselineDetector BaselineDetector::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open baseline checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "attrib-baseline-v1") {
    throw std::runtime_error("unsupported baseline checkpoint format in " + path);
  }
  const BaselineKind kind = baseline_kind_from_string(j.at("kind").get<std::string>());
  LinearModel model;
  model.feature_spec = j.at("feature_spec").get<std::string>();
  model.weights = j.at("weights").get<std::vector<double>>();
  model.bias = j.at("bias").get<double>();
  Vocabulary vocab;
  std::vector<double> idf;
  Standardizer standardizer;
  if (j.contains("vocab")) {
    const auto& v = j.at("vocab");
    vocab.ngram_lo = v.at("ngram_lo").get<int>();
    vocab.ngram_hi = v.at("ngram_hi").get<int>();
    vocab.min_df = v.at("min_df").get<uint32_t>();
    vocab.document_count = v.at("document_count").get<uint32_t>();
    for (const auto& row : v.at("terms")) {
      const auto term = row.at(0).get<std::string>();
      const auto col = row.at(1).get<uint32_t>();
      vocab.index.emplace(term, col);
      vocab.df.emplace(term, row.at(2).get<uint32_t>());
    }
  }
  if (j.contains("idf")) idf = j.at("idf").get<std::vector<double>>();
  if (j.contains("standardizer")) {
    standardizer = Standardizer::from_moments(
        j.at("standardizer").at("mean").get<std::vector<double>>(),
        j.at("standardizer").at("std").get<std::vector<double>>());
  }
  return BaselineDetector(kind, std::move(model), std::move(vocab), std::move(idf),
                          std::move(standardizer));
}

}  // namespace attrib
