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

#ifndef ATTRIB_CORPUS_HPP_
#define ATTRIB_CORPUS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "attrib/rng.hpp"

namespace attrib {

// Battle-log and query/response ingestion, deterministic splits, and
// preference-pair assembly.

enum class Outcome { kAWins, kBWins, kTie };

struct BattleRecord {
  std::string model_a;
  std::string model_b;
  Outcome outcome = Outcome::kAWins;
  size_t index = 0;  // ordinal position in the source log
};

struct ResponseRecord {
  std::string query_id;
  std::string query;
  std::string model;
  std::string response;
};

// Query/response records keyed by (query_id, model); the key pair is unique.
class ResponseCorpus {
 public:
  void add(ResponseRecord record);  // throws on duplicate (query_id, model)

  const std::vector<ResponseRecord>& records() const { return records_; }
  // Sorted distinct query ids / model ids.
  std::vector<std::string> query_ids() const;
  std::vector<std::string> models() const;

  const ResponseRecord* find(const std::string& query_id, const std::string& model) const;
  const std::string* query_text(const std::string& query_id) const;

  size_t size() const { return records_.size(); }

 private:
  std::vector<ResponseRecord> records_;
  std::unordered_map<std::string, std::unordered_map<std::string, size_t>> by_query_;
};

struct SplitCorpus {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  uint64_t seed = 0;
};

struct PreferencePair {
  std::string query_id;
  std::string query;
  std::string y_star;        // target-model response
  std::string y_o;           // selected non-target response
  std::string source_model;  // model that produced y_o
};

// One training example of the triplet dataset. assigned_task is transient
// trainer state: it is recomputed from the current scorer at the start of
// every epoch and never persisted.
enum class TaskKind { kPair, kTriplet };

struct TripletExample {
  std::string query_id;
  std::string query;
  std::string y_star;
  std::string y_alpha;  // synthesized middle-difficulty negative
  std::string y_o;
  TaskKind assigned_task = TaskKind::kTriplet;
};

// Battle log: JSON Lines with fields model_a, model_b and
// winner in {"model_a","model_b","tie"}. Extra fields are ignored.
// Malformed lines (missing field, model_a == model_b, unknown winner) raise
// a parse error naming the 1-based line number.
std::vector<BattleRecord> load_battles(const std::string& path);

// Response corpus: JSON Lines with string fields query_id, query, model,
// response. Duplicate (query_id, model) pairs raise an error with the line.
ResponseCorpus load_responses(const std::string& path);

// Deterministic prefix split: distinct query ids are sorted, Fisher-Yates
// shuffled under SplitMix64(seed), and assigned train/val/test by prefix.
// Identical (corpus, seed, sizes) inputs always produce identical splits.
SplitCorpus split_corpus(const ResponseCorpus& corpus, uint64_t seed,
                         size_t train_size, size_t val_size, size_t test_size);

enum class NegativeStrategy { kHard, kEasy, kRandom };

using EmbedFn = std::function<std::vector<double>(const std::string&)>;

// kHard picks the candidate with maximum cosine similarity to the embedding
// of y_star, kEasy the minimum, kRandom a uniform draw. Cosine ties are
// broken by the lowest candidate index. Throws on an empty candidate list.
size_t select_negative(const std::string& y_star,
                       const std::vector<std::string>& candidates,
                       NegativeStrategy strategy, const EmbedFn& embed,
                       SplitMix64& rng);

// Exactly one pair per query id in `query_ids`, with the negative chosen by
// select_negative among all non-target responses for that query. A query
// with no target response or no non-target response raises an error naming
// the query id.
std::vector<PreferencePair> build_pairs(const ResponseCorpus& corpus,
                                        const std::vector<std::string>& query_ids,
                                        const std::string& target_model,
                                        NegativeStrategy strategy,
                                        const EmbedFn& embed, SplitMix64& rng);

}  // namespace attrib

#endif  // ATTRIB_CORPUS_HPP_
