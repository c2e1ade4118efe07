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

// Emits a synthetic query/response corpus and battle log so the pipeline can
// be exercised end to end without collecting real data.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate demo data: a stylistic response corpus and a battle log"};
  std::string out_dir = "demo_data";
  uint64_t seed = 1;
  size_t queries = 1400;
  size_t battles = 20000;
  size_t pool = 20;
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--queries", queries, "Number of queries in the corpus");
  app.add_option("--battles", battles, "Number of battles in the log");
  app.add_option("--pool", pool, "Number of models on the leaderboard");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);

    attrib::testsupport::SynthConfig config;
    config.n_queries = queries;
    config.seed = seed;
    const auto corpus = attrib::testsupport::make_corpus(config);
    const std::string responses_path = out_dir + "/responses.jsonl";
    attrib::testsupport::write_responses_jsonl(corpus, responses_path);

    std::vector<std::string> leaderboard;
    std::vector<double> ratings;
    for (size_t i = 0; i < pool; ++i) {
      std::string name = "lm" + std::to_string(i);
      if (name.size() < 5) name.insert(2, 5 - name.size(), '0');
      leaderboard.push_back(name);
      ratings.push_back(1.5 - 3.0 * static_cast<double>(i) / static_cast<double>(pool - 1));
    }
    const auto log =
        attrib::testsupport::make_battle_log(leaderboard, ratings, battles, 0.05, seed + 17);
    const std::string battles_path = out_dir + "/battles.jsonl";
    attrib::testsupport::write_battles_jsonl(log, battles_path);

    std::cout << "wrote " << responses_path << " (" << corpus.size() << " records) and "
              << battles_path << " (" << log.size() << " battles)\n";
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
