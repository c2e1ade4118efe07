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

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attrib/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "attrib: trains detectors that identify which model wrote a response and "
      "simulates vote-rigging attacks on a Bradley-Terry leaderboard"};
  app.require_subcommand(1);

  attrib::cli::IngestOptions ingest_options;
  auto* ingest = app.add_subcommand("ingest", "Validate battle logs and response corpora");
  ingest->add_option("--battles", ingest_options.battles_path, "Battle log (JSON Lines)");
  ingest->add_option("--responses", ingest_options.responses_path, "Response corpus (JSON Lines)");
  ingest->add_option("--out", ingest_options.out_dir, "Optional run directory for the summary");

  std::string config_path, out_dir;
  auto* train_baseline =
      app.add_subcommand("train-baseline", "Train a statistical baseline detector");
  train_baseline->add_option("--config", config_path, "JSON config file")->required();
  train_baseline->add_option("--out", out_dir, "Run directory")->required();

  attrib::cli::ScorerOverrides overrides;
  std::string negatives_flag;
  int stages_flag = 0;
  auto* train_scorer = app.add_subcommand(
      "train-scorer", "Train the preference-curriculum detector");
  train_scorer->add_option("--config", config_path, "JSON config file")->required();
  train_scorer->add_option("--out", out_dir, "Run directory")->required();
  train_scorer->add_option("--negatives", negatives_flag,
                           "Override negative selection: hard|easy|random");
  train_scorer->add_flag("--no-triplet", overrides.no_triplet,
                         "Train with the pairwise loss only");
  train_scorer->add_flag("--no-adaptive", overrides.no_adaptive,
                         "Disable margin-based task reassignment");
  train_scorer->add_option("--stages", stages_flag, "Use only the first N curriculum stages");

  std::vector<double> alphas;
  auto* sweep_alpha = app.add_subcommand(
      "sweep-alpha", "Accuracy/AUROC across interpolation factors");
  sweep_alpha->add_option("--config", config_path, "JSON config file")->required();
  sweep_alpha->add_option("--out", out_dir, "Run directory")->required();
  sweep_alpha->add_option("--alphas", alphas, "Interpolation factors to sweep");

  auto* simulate = app.add_subcommand("simulate", "Run ranking-manipulation simulations");
  simulate->add_option("--config", config_path, "JSON config file")->required();
  simulate->add_option("--out", out_dir, "Run directory")->required();

  std::vector<std::string> report_inputs;
  std::string report_out = "summary.md";
  auto* report = app.add_subcommand("report", "Consolidate run artifacts into markdown");
  report->add_option("runs", report_inputs, "Run directories")->required();
  report->add_option("--out", report_out, "Output markdown path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      attrib::cli::cmd_ingest(ingest_options, std::cout);
    } else if (*train_baseline) {
      attrib::cli::cmd_train_baseline(config_path, out_dir, std::cout);
    } else if (*train_scorer) {
      if (!negatives_flag.empty()) overrides.negatives = negatives_flag;
      if (stages_flag > 0) overrides.stages = stages_flag;
      attrib::cli::cmd_train_scorer(config_path, out_dir, overrides, std::cout);
    } else if (*sweep_alpha) {
      attrib::cli::cmd_sweep_alpha(config_path, out_dir, alphas, std::cout);
    } else if (*simulate) {
      attrib::cli::cmd_simulate(config_path, out_dir, std::cout);
    } else if (*report) {
      attrib::cli::cmd_report(report_inputs, report_out, std::cout);
    }
  } catch (const attrib::cli::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
