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

#ifndef ATTRIB_CLI_HPP_
#define ATTRIB_CLI_HPP_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace attrib::cli {

// Raised for bad configs, malformed inputs, and violated preconditions;
// mapped to exit code 1. Other exceptions are runtime failures (exit 2).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every command validates its inputs, writes all artifacts under out_dir,
// and finishes by writing resolved_config.json (the fully defaulted config
// that reproduces the run) plus manifest.json (artifact paths and SHA-256
// hashes). All randomness derives from the config's global seed through
// named stream splitting; the train/val/test split uses its own pinned seed.

struct IngestOptions {
  std::string battles_path;    // optional
  std::string responses_path;  // optional
  std::string out_dir;         // optional; summary also goes to `log`
};

void cmd_ingest(const IngestOptions& options, std::ostream& log);

void cmd_train_baseline(const std::string& config_path, const std::string& out_dir,
                        std::ostream& log);

struct ScorerOverrides {
  std::optional<std::string> negatives;  // hard | easy | random
  bool no_triplet = false;
  bool no_adaptive = false;
  std::optional<int> stages;  // keep only the first N stages
};

void cmd_train_scorer(const std::string& config_path, const std::string& out_dir,
                      const ScorerOverrides& overrides, std::ostream& log);

// Trains one single-stage detector per interpolation factor and tabulates
// test accuracy/AUROC against alpha.
void cmd_sweep_alpha(const std::string& config_path, const std::string& out_dir,
                     const std::vector<double>& alphas_override, std::ostream& log);

void cmd_simulate(const std::string& config_path, const std::string& out_dir, std::ostream& log);

// Consolidates artifacts from previous run directories into one markdown
// summary at out_path.
void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_path,
                std::ostream& log);

}  // namespace attrib::cli

#endif  // ATTRIB_CLI_HPP_
