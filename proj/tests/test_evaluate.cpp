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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "attrib/rng.hpp"
#include "doctest.h"

using namespace attrib;

namespace {

// Brute-force AUROC: count wins and half-credit ties over all pairs.
double auroc_oracle(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (const double p : pos) {
    for (const double n : neg) {
      if (p > n) {
        wins += 1.0;
      } else if (p == n) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

ResponseCorpus corpus_with_scores(const std::map<std::string, std::vector<double>>& scores,
                                  size_t queries) {
  ResponseCorpus corpus;
  for (size_t q = 0; q < queries; ++q) {
    for (const auto& [model, values] : scores) {
      ResponseRecord r;
      r.query_id = "q" + std::to_string(q);
      r.query = "query";
      r.model = model;
      // Response encodes its intended score so a text-parsing detector can
      // recover it.
      r.response = model + ":" + std::to_string(values[q]);
      corpus.add(std::move(r));
    }
  }
  return corpus;
}

ScoreFn parse_score_detector() {
  return [](const std::string&, const std::string& response) {
    return std::stod(response.substr(response.find(':') + 1));
  };
}

std::vector<std::string> query_list(size_t n) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < n; ++i) ids.push_back("q" + std::to_string(i));
  return ids;
}

}  // namespace

TEST_CASE("pairwise accuracy: constant, oracle, and one inversion") {
  const auto queries = query_list(5);

  const ResponseCorpus tied =
      corpus_with_scores({{"target", {1, 1, 1, 1, 1}}, {"opp", {1, 1, 1, 1, 1}}}, 5);
  CHECK(pairwise_accuracy(parse_score_detector(), tied, queries, "target", "opp") == 0.5);
  const ScoreFn constant = [](const std::string&, const std::string&) { return 3.14; };
  CHECK(pairwise_accuracy(constant, tied, queries, "target", "opp") == 0.5);

  // Oracle detector: 1 on target responses, 0 otherwise.
  const ScoreFn oracle = [](const std::string&, const std::string& response) {
    return response.rfind("target:", 0) == 0 ? 1.0 : 0.0;
  };
  CHECK(pairwise_accuracy(oracle, tied, queries, "target", "opp") == 1.0);

  // Five hand-scored queries with exactly one inversion.
  const ResponseCorpus inv =
      corpus_with_scores({{"target", {5, 4, 3, 2, 0}}, {"opp", {1, 1, 1, 1, 1}}}, 5);
  CHECK(pairwise_accuracy(parse_score_detector(), inv, queries, "target", "opp") == 0.8);
}

TEST_CASE("auroc examples") {
  CHECK(auroc({2.0, 3.0}, {0.0, 1.0}) == 1.0);
  CHECK(auroc({1.0, 2.0}, {1.0, 2.0}) == 0.5);
  CHECK(auroc({0.9, 0.4}, {0.5, 0.1}) == 0.75);
  CHECK_THROWS_AS(auroc({}, {1.0}), std::invalid_argument);
}

TEST_CASE("auroc matches the brute-force oracle on random score sets with ties") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pos, neg;
    const size_t n_pos = 1 + rng.below(30);
    const size_t n_neg = 1 + rng.below(30);
    // Quantized scores force tie groups.
    for (size_t i = 0; i < n_pos; ++i) pos.push_back(static_cast<double>(rng.below(8)) / 4.0);
    for (size_t i = 0; i < n_neg; ++i) neg.push_back(static_cast<double>(rng.below(8)) / 4.0);
    CHECK(auroc(pos, neg) == doctest::Approx(auroc_oracle(pos, neg)).epsilon(1e-12));
  }
}

TEST_CASE("auroc is invariant under strictly monotone transforms") {
  SplitMix64 rng(32);
  std::vector<double> pos, neg;
  for (int i = 0; i < 25; ++i) pos.push_back(rng.next_double() * 4.0 - 2.0);
  for (int i = 0; i < 40; ++i) neg.push_back(rng.next_double() * 4.0 - 2.0);
  const double base = auroc(pos, neg);
  const auto apply = [](std::vector<double> v, auto fn) {
    for (auto& x : v) x = fn(x);
    return v;
  };
  const auto affine = [](double x) { return 3.0 * x + 7.0; };
  const auto expfn = [](double x) { return std::exp(x); };
  CHECK(auroc(apply(pos, affine), apply(neg, affine)) == base);
  CHECK(auroc(apply(pos, expfn), apply(neg, expfn)) == base);
}

TEST_CASE("full_report covers every opponent and macro equals the mean") {
  SplitMix64 rng(33);
  std::map<std::string, std::vector<double>> scores;
  const size_t queries = 40;
  for (const auto* model : {"target", "m1", "m2", "m3"}) {
    std::vector<double> v;
    for (size_t q = 0; q < queries; ++q) {
      v.push_back(rng.next_double() + (std::string(model) == "target" ? 0.3 : 0.0));
    }
    scores[model] = v;
  }
  const ResponseCorpus corpus = corpus_with_scores(scores, queries);
  const EvalReport report =
      full_report(parse_score_detector(), corpus, query_list(queries), "target", 10);

  REQUIRE(report.per_opponent.size() == 3);
  CHECK(report.scored_pairs == 3 * queries);
  double acc = 0.0, auc = 0.0;
  for (const auto& [model, res] : report.per_opponent) {
    acc += res.accuracy;
    auc += res.auroc;
    CHECK(res.scored_queries == queries);
    CHECK(res.skipped_queries == 0);
  }
  CHECK(std::abs(report.macro_accuracy - acc / 3.0) < 1e-12);
  CHECK(std::abs(report.macro_auroc - auc / 3.0) < 1e-12);
  CHECK(!report.histogram.empty());

  // Histogram counts add up to every scored response.
  size_t total = 0;
  for (const auto& bin : report.histogram) {
    for (const auto& [model, count] : bin.counts) total += count;
  }
  CHECK(total == 4 * queries);
}

TEST_CASE("perfect separation gives auroc 1 and accuracy 1 per opponent") {
  std::map<std::string, std::vector<double>> scores;
  scores["target"] = {10, 11, 12, 13};
  scores["m1"] = {1, 2, 3, 4};
  scores["m2"] = {2, 3, 4, 5};
  const ResponseCorpus corpus = corpus_with_scores(scores, 4);
  const EvalReport report = full_report(parse_score_detector(), corpus, query_list(4), "target", 0);
  for (const auto& [model, res] : report.per_opponent) {
    CHECK(res.auroc == 1.0);
    CHECK(res.accuracy == 1.0);
  }
}

TEST_CASE("missing opponent responses are skipped and counted") {
  ResponseCorpus corpus;
  for (size_t q = 0; q < 6; ++q) {
    for (const auto* model : {"target", "m1"}) {
      if (q == 2 && std::string(model) == "m1") continue;  // hole
      ResponseRecord r;
      r.query_id = "q" + std::to_string(q);
      r.query = "query";
      r.model = model;
      r.response = std::string(model) + ":" + std::to_string(q + (model[0] == 't' ? 10 : 0));
      corpus.add(std::move(r));
    }
  }
  const EvalReport report =
      full_report(parse_score_detector(), corpus, query_list(6), "target", 0);
  const auto& res = report.per_opponent.at("m1");
  CHECK(res.scored_queries == 5);
  CHECK(res.skipped_queries == 1);
  CHECK(report.scored_pairs == 5);
}

TEST_CASE("report writers emit csv and markdown") {
  std::map<std::string, std::vector<double>> scores;
  scores["target"] = {5, 6};
  scores["m1"] = {1, 2};
  const ResponseCorpus corpus = corpus_with_scores(scores, 2);
  const EvalReport report = full_report(parse_score_detector(), corpus, query_list(2), "target", 4);

  const auto tmp = std::filesystem::temp_directory_path();
  const std::string csv = (tmp / "attrib_test_report.csv").string();
  const std::string hist = (tmp / "attrib_test_hist.csv").string();
  write_report_csv(report, csv);
  write_histogram_csv(report, hist);

  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "opponent,accuracy,auroc,scored,skipped");
  std::ifstream hin(hist);
  std::getline(hin, header);
  CHECK(header == "bin_lo,bin_hi,model,count");

  const std::string md = report_markdown(report);
  CHECK(md.find("| m1 |") != std::string::npos);
  CHECK(md.find("macro") != std::string::npos);

  std::filesystem::remove(csv);
  std::filesystem::remove(hist);
}
