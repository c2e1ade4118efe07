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

#include "attrib/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace attrib {

double pairwise_accuracy(const ScoreFn& detector, const ResponseCorpus& corpus,
                         const std::vector<std::string>& query_ids, const std::string& target,
                         const std::string& opponent) {
  double correct = 0.0;
  size_t scored = 0;
  for (const auto& qid : query_ids) {
    const ResponseRecord* star = corpus.find(qid, target);
    const ResponseRecord* other = corpus.find(qid, opponent);
    if (star == nullptr || other == nullptr) continue;
    const double s_star = detector(star->query, star->response);
    const double s_other = detector(other->query, other->response);
    if (s_star > s_other) {
      correct += 1.0;
    } else if (s_star == s_other) {
      correct += 0.5;
    }
    ++scored;
  }
  if (scored == 0) throw std::invalid_argument("pairwise_accuracy: no scorable queries");
  return correct / static_cast<double>(scored);
}

double auroc(std::vector<double> pos_scores, std::vector<double> neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw std::invalid_argument("auroc: both score lists must be non-empty");
  }
  // Mann-Whitney U via average ranks over the combined sorted scores.
  const size_t n_pos = pos_scores.size();
  const size_t n_neg = neg_scores.size();
  std::vector<std::pair<double, int>> all;  // (score, is_positive)
  all.reserve(n_pos + n_neg);
  for (const double s : pos_scores) all.emplace_back(s, 1);
  for (const double s : neg_scores) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < all.size()) {
    size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    // Ranks are 1-based; tied scores share the average rank of the block.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) {
      if (all[k].second == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

EvalReport full_report(const ScoreFn& detector, const ResponseCorpus& corpus,
                       const std::vector<std::string>& query_ids, const std::string& target,
                       int histogram_bins) {
  EvalReport report;
  report.target = target;

  // Score cache: each (query, model) response is scored once.
  std::vector<std::string> models = corpus.models();
  if (std::find(models.begin(), models.end(), target) == models.end()) {
    throw std::invalid_argument("full_report: target model '" + target + "' not in corpus");
  }
  std::map<std::string, std::vector<std::pair<bool, double>>> scores;  // model -> per query
  for (const auto& model : models) {
    auto& column = scores[model];
    column.reserve(query_ids.size());
    for (const auto& qid : query_ids) {
      const ResponseRecord* rec = corpus.find(qid, model);
      if (rec == nullptr) {
        column.emplace_back(false, 0.0);
      } else {
        column.emplace_back(true, detector(rec->query, rec->response));
      }
    }
  }

  const auto& target_scores = scores.at(target);
  double acc_sum = 0.0, auc_sum = 0.0;
  size_t opponents = 0;
  for (const auto& model : models) {
    if (model == target) continue;
    const auto& opp_scores = scores.at(model);
    OpponentResult res;
    std::vector<double> pos, neg;
    double correct = 0.0;
    for (size_t q = 0; q < query_ids.size(); ++q) {
      if (!target_scores[q].first || !opp_scores[q].first) {
        ++res.skipped_queries;
        continue;
      }
      const double s_star = target_scores[q].second;
      const double s_opp = opp_scores[q].second;
      if (s_star > s_opp) {
        correct += 1.0;
      } else if (s_star == s_opp) {
        correct += 0.5;
      }
      pos.push_back(s_star);
      neg.push_back(s_opp);
      ++res.scored_queries;
    }
    if (res.scored_queries == 0) {
      throw std::runtime_error("full_report: opponent '" + model + "' has no scorable queries");
    }
    res.accuracy = correct / static_cast<double>(res.scored_queries);
    res.auroc = auroc(std::move(pos), std::move(neg));
    acc_sum += res.accuracy;
    auc_sum += res.auroc;
    report.scored_pairs += res.scored_queries;
    report.per_opponent.emplace(model, res);
    ++opponents;
  }
  if (opponents == 0) throw std::invalid_argument("full_report: no opponents");
  report.macro_accuracy = acc_sum / static_cast<double>(opponents);
  report.macro_auroc = auc_sum / static_cast<double>(opponents);

  if (histogram_bins > 0) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& [model, column] : scores) {
      for (const auto& [present, s] : column) {
        if (!present) continue;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
    if (!(hi > lo)) hi = lo + 1.0;  // all scores identical
    const double width = (hi - lo) / histogram_bins;
    report.histogram.resize(histogram_bins);
    for (int b = 0; b < histogram_bins; ++b) {
      report.histogram[b].lo = lo + b * width;
      report.histogram[b].hi = lo + (b + 1) * width;
    }
    for (const auto& [model, column] : scores) {
      for (const auto& [present, s] : column) {
        if (!present) continue;
        auto bin = static_cast<int>((s - lo) / width);
        bin = std::clamp(bin, 0, histogram_bins - 1);
        ++report.histogram[bin].counts[model];
      }
    }
  }
  return report;
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report csv: " + path);
  out.precision(17);
  out << "opponent,accuracy,auroc,scored,skipped\n";
  for (const auto& [model, res] : report.per_opponent) {
    out << model << ',' << res.accuracy << ',' << res.auroc << ',' << res.scored_queries << ','
        << res.skipped_queries << '\n';
  }
  out << "macro," << report.macro_accuracy << ',' << report.macro_auroc << ','
      << report.scored_pairs << ",0\n";
}

std::string report_markdown(const EvalReport& report) {
  std::ostringstream out;
  out.precision(4);
  out << "| Opponent | Accuracy | AUROC |\n|---|---|---|\n";
  for (const auto& [model, res] : report.per_opponent) {
    out << "| " << model << " | " << res.accuracy << " | " << res.auroc << " |\n";
  }
  out << "| **macro** | " << report.macro_accuracy << " | " << report.macro_auroc << " |\n";
  return out.str();
}

void write_histogram_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write histogram csv: " + path);
  out.precision(17);
  out << "bin_lo,bin_hi,model,count\n";
  for (const auto& bin : report.histogram) {
    for (const auto& [model, count] : bin.counts) {
      out << bin.lo << ',' << bin.hi << ',' << model << ',' << count << '\n';
    }
  }
}

}  // namespace attrib
