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

#ifndef ATTRIB_EVALUATE_HPP_
#define ATTRIB_EVALUATE_HPP_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "attrib/corpus.hpp"

namespace attrib {

// Detector evaluation over the query-set x non-target-models protocol:
// pairwise accuracy and AUROC per opponent, macro averages, and score
// distribution export.

using ScoreFn = std::function<double(const std::string& query, const std::string& response)>;

// Fraction of queries where the target response outscores the opponent
// response; exact score ties count 0.5.
double pairwise_accuracy(const ScoreFn& detector, const ResponseCorpus& corpus,
                         const std::vector<std::string>& query_ids,
                         const std::string& target, const std::string& opponent);

// Probability that a random positive outscores a random negative, ties 0.5
// (the Mann-Whitney statistic), computed exactly via sorted average ranks.
double auroc(std::vector<double> pos_scores, std::vector<double> neg_scores);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::map<std::string, size_t> counts;  // model -> count in [lo, hi)
};

struct OpponentResult {
  double accuracy = 0.0;
  double auroc = 0.0;
  size_t scored_queries = 0;
  size_t skipped_queries = 0;  // missing either response
};

struct EvalReport {
  std::string target;
  std::map<std::string, OpponentResult> per_opponent;
  double macro_accuracy = 0.0;
  double macro_auroc = 0.0;
  size_t scored_pairs = 0;
  std::vector<HistogramBin> histogram;  // shared bins over all models' scores
};

// Scores every (query, opponent) pair of the given query set against each
// non-target model. Queries missing either response are skipped for that
// opponent and counted. Macro averages are plain means of the per-opponent
// values. histogram_bins <= 0 disables the histogram.
EvalReport full_report(const ScoreFn& detector, const ResponseCorpus& corpus,
                       const std::vector<std::string>& query_ids,
                       const std::string& target, int histogram_bins = 40);

// CSV opponent,accuracy,auroc,scored,skipped plus macro row.
void write_report_csv(const EvalReport& report, const std::string& path);
// Markdown table, one row per opponent.
std::string report_markdown(const EvalReport& report);
// CSV bin_lo,bin_hi,model,count.
void write_histogram_csv(const EvalReport& report, const std::string& path);

}  // namespace attrib

#endif  // ATTRIB_EVALUATE_HPP_
