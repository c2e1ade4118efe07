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

#include "attrib/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "attrib/featurize.hpp"
#include "json.hpp"

namespace attrib {

namespace {

[[noreturn]] void parse_error(const std::string& path, size_t line_no, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

std::string require_string(const nlohmann::json& j, const char* field, const std::string& path,
                           size_t line_no) {
  const auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    parse_error(path, line_no, std::string("missing string field '") + field + "'");
  }
  return it->get<std::string>();
}

}  // namespace

void ResponseCorpus::add(ResponseRecord record) {
  auto& models = by_query_[record.query_id];
  if (models.count(record.model) != 0) {
    throw std::runtime_error("duplicate (query_id, model): (" + record.query_id + ", " +
                             record.model + ")");
  }
  models.emplace(record.model, records_.size());
  records_.push_back(std::move(record));
}

std::vector<std::string> ResponseCorpus::query_ids() const {
  std::set<std::string> ids;
  for (const auto& r : records_) ids.insert(r.query_id);
  return {ids.begin(), ids.end()};
}

std::vector<std::string> ResponseCorpus::models() const {
  std::set<std::string> ids;
  for (const auto& r : records_) ids.insert(r.model);
  return {ids.begin(), ids.end()};
}

const ResponseRecord* ResponseCorpus::find(const std::string& query_id,
                                           const std::string& model) const {
  const auto qit = by_query_.find(query_id);
  if (qit == by_query_.end()) return nullptr;
  const auto mit = qit->second.find(model);
  if (mit == qit->second.end()) return nullptr;
  return &records_[mit->second];
}

const std::string* ResponseCorpus::query_text(const std::string& query_id) const {
  const auto qit = by_query_.find(query_id);
  if (qit == by_query_.end() || qit->second.empty()) return nullptr;
  return &records_[qit->second.begin()->second].query;
}

std::vector<BattleRecord> load_battles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open battle log: " + path);
  std::vector<BattleRecord> battles;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      parse_error(path, line_no, e.what());
    }
    BattleRecord rec;
    rec.model_a = require_string(j, "model_a", path, line_no);
    rec.model_b = require_string(j, "model_b", path, line_no);
    const std::string winner = require_string(j, "winner", path, line_no);
    if (rec.model_a == rec.model_b) {
      parse_error(path, line_no, "model_a and model_b are both '" + rec.model_a + "'");
    }
    if (winner == "model_a") {
      rec.outcome = Outcome::kAWins;
    } else if (winner == "model_b") {
      rec.outcome = Outcome::kBWins;
    } else if (winner == "tie") {
      rec.outcome = Outcome::kTie;
    } else {
      parse_error(path, line_no, "unknown winner '" + winner + "'");
    }
    rec.index = battles.size();
    battles.push_back(std::move(rec));
  }
  return battles;
}

ResponseCorpus load_responses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open response corpus: " + path);
  ResponseCorpus corpus;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      parse_error(path, line_no, e.what());
    }
    ResponseRecord rec;
    rec.query_id = require_string(j, "query_id", path, line_no);
    rec.query = require_string(j, "query", path, line_no);
    rec.model = require_string(j, "model", path, line_no);
    rec.response = require_string(j, "response", path, line_no);
    try {
      corpus.add(std::move(rec));
    } catch (const std::runtime_error& e) {
      parse_error(path, line_no, e.what());
    }
  }
  return corpus;
}

SplitCorpus split_corpus(const ResponseCorpus& corpus, uint64_t seed, size_t train_size,
                         size_t val_size, size_t test_size) {
  std::vector<std::string> ids = corpus.query_ids();  // sorted
  const size_t total = train_size + val_size + test_size;
  if (total > ids.size()) {
    throw std::invalid_argument("split sizes (" + std::to_string(total) +
                                ") exceed distinct query count (" + std::to_string(ids.size()) +
                                ")");
  }
  SplitMix64 rng(seed);
  fisher_yates(ids, rng);
  SplitCorpus split;
  split.seed = seed;
  split.train.assign(ids.begin(), ids.begin() + train_size);
  split.val.assign(ids.begin() + train_size, ids.begin() + train_size + val_size);
  split.test.assign(ids.begin() + train_size + val_size, ids.begin() + total);
  return split;
}

size_t select_negative(const std::string& y_star, const std::vector<std::string>& candidates,
                       NegativeStrategy strategy, const EmbedFn& embed, SplitMix64& rng) {
  if (candidates.empty()) throw std::invalid_argument("select_negative: no candidates");
  if (strategy == NegativeStrategy::kRandom) {
    return static_cast<size_t>(rng.below(candidates.size()));
  }
  const std::vector<double> target = embed(y_star);
  size_t best = 0;
  double best_sim = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const std::vector<double> cand = embed(candidates[i]);
    const double sim = cosine(std::span<const double>(target), std::span<const double>(cand));
    const bool better =
        strategy == NegativeStrategy::kHard ? sim > best_sim : sim < best_sim;
    if (i == 0 || better) {
      best = i;
      best_sim = sim;
    }
  }
  return best;
}

std::vector<PreferencePair> build_pairs(const ResponseCorpus& corpus,
                                        const std::vector<std::string>& query_ids,
                                        const std::string& target_model,
                                        NegativeStrategy strategy, const EmbedFn& embed,
                                        SplitMix64& rng) {
  const std::vector<std::string> models = corpus.models();
  std::vector<PreferencePair> pairs;
  pairs.reserve(query_ids.size());
  for (const auto& qid : query_ids) {
    const ResponseRecord* star = corpus.find(qid, target_model);
    if (star == nullptr) {
      throw std::runtime_error("query '" + qid + "' has no response from target model '" +
                               target_model + "'");
    }
    std::vector<std::string> candidates;
    std::vector<std::string> candidate_models;
    for (const auto& m : models) {
      if (m == target_model) continue;
      const ResponseRecord* r = corpus.find(qid, m);
      if (r != nullptr) {
        candidates.push_back(r->response);
        candidate_models.push_back(m);
      }
    }
    if (candidates.empty()) {
      throw std::runtime_error("query '" + qid + "' has no non-target responses");
    }
    const size_t pick = select_negative(star->response, candidates, strategy, embed, rng);
    PreferencePair pair;
    pair.query_id = qid;
    pair.query = star->query;
    pair.y_star = star->response;
    pair.y_o = candidates[pick];
    pair.source_model = candidate_models[pick];
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace attrib
