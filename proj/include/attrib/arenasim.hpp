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

#ifndef ATTRIB_ARENASIM_HPP_
#define ATTRIB_ARENASIM_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "attrib/corpus.hpp"
#include "attrib/rng.hpp"

namespace attrib {

// Ranking-manipulation simulator: Bradley-Terry leaderboard reconstruction
// from a battle log, uniform battle sampling, a detector oracle with a given
// accuracy, passive and aggressive voting policies, and interaction/vote
// accounting.
//
// One loop iteration is one interaction: a battle is sampled uniformly, the
// attacker's detector attempts identification, the policy casts a vote or
// abstains, and exactly one outcome (the attacker's vote or a simulated
// organic vote) is appended to the log. Ratings are refit every
// refit_interval appended votes; ranks, the enemy list, and the stopping
// condition only change at refit boundaries.

enum class TiePolicy { kHalfWin, kDrop };

struct BtConfig {
  TiePolicy tie_policy = TiePolicy::kHalfWin;
  double ridge = 1e-9;       // identifiability on degenerate win graphs
  double tol = 1e-8;         // gradient infinity-norm
  int max_iter = 500;
};

// Penalized maximum likelihood Bradley-Terry ratings: maximizes
// sum log sigmoid(r_w - r_l) - ridge * ||r||^2 by damped Newton iteration,
// then mean-centers. Ties contribute half a win to each side (kHalfWin) or
// are dropped (kDrop). A model in `models` with no battles is an error
// naming the model. warm_start, when given, seeds the iteration.
std::vector<double> fit_bt(const std::vector<std::string>& models,
                           const std::vector<BattleRecord>& battles,
                           const BtConfig& config = {},
                           const std::vector<double>* warm_start = nullptr);

// Dense ranks 1..M consistent with descending ratings; exact rating ties
// break by model-id order.
std::vector<int> ranks_from_ratings(const std::vector<std::string>& models,
                                    const std::vector<double>& ratings);

class LeaderboardState {
 public:
  // Fits ratings on the initial log and derives ranks.
  static LeaderboardState initialize(std::vector<std::string> models,
                                     const std::vector<BattleRecord>& initial_log,
                                     const BtConfig& config);

  // Appends one vote to the accumulated log.
  void append(BattleRecord battle);

  // Refits on the full accumulated log once votes_since_refit reaches
  // `interval`, recomputing ranks and resetting the counter. Returns
  // whether a refit ran.
  bool refit_if_due(size_t interval, const BtConfig& config);
  void refit(const BtConfig& config);

  const std::vector<std::string>& models() const { return models_; }
  const std::vector<double>& ratings() const { return ratings_; }
  const std::vector<int>& ranks() const { return ranks_; }
  size_t votes_since_refit() const { return votes_since_refit_; }
  size_t log_size() const { return log_size_; }

  size_t model_index(const std::string& model) const;  // throws if unknown
  int rank_of(const std::string& model) const;

 private:
  std::vector<std::string> models_;
  std::map<std::string, size_t> index_;
  std::vector<double> ratings_;
  std::vector<int> ranks_;
  std::vector<double> win_counts_;  // aggregated wins, row-major MxM
  std::vector<size_t> appearances_;
  size_t log_size_ = 0;
  size_t votes_since_refit_ = 0;
  TiePolicy aggregate_policy_ = TiePolicy::kHalfWin;

  void aggregate(const BattleRecord& battle);
  friend std::vector<double> fit_bt_counts(const std::vector<std::string>&,
                                           const std::vector<double>&, const BtConfig&,
                                           const std::vector<double>*);
};

enum class ObjectiveKind { kPromoteTo, kDemoteTo };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kPromoteTo;
  int rank = 1;

  bool satisfied(int current_rank) const {
    return kind == ObjectiveKind::kPromoteTo ? current_rank <= rank : current_rank >= rank;
  }
};

enum class PolicyKind { kPassive, kAggressive };

struct AttackConfig {
  std::string target;
  Objective objective;
  PolicyKind policy = PolicyKind::kPassive;
  int enemy_window = 3;
  double detector_accuracy = 0.951;
  size_t max_interactions = 200000;
  uint64_t seed = 0;

  // When enabled, a battle without the target yields a false identification
  // with probability 1 - detector_accuracy, attributed to a uniformly
  // random participant (symmetric error model). Off by default: votes are
  // then cast only on true identifications, which reproduces the observed
  // near-constant vote counts across detector accuracies.
  bool false_positives = false;

  double organic_tie_prob = 0.0;
  size_t refit_interval = 100;
  BtConfig bt;

  void validate(size_t model_count) const;  // throws std::invalid_argument
};

struct BattlePair {
  size_t a = 0;
  size_t b = 0;
};

// Uniform over unordered distinct pairs (drawn as a uniform ordered pair).
BattlePair sample_battle(size_t model_count, SplitMix64& rng);

// Organic voter model: A wins with probability sigmoid(r_a - r_b); a tie
// occurs first with probability tie_prob.
Outcome simulate_outcome(double rating_a, double rating_b, double tie_prob, SplitMix64& rng);

struct Identification {
  bool believed_present = false;
  int believed_side = -1;  // 0 = model_a, 1 = model_b when believed_present
};

// If the target sits on target_side (0/1, -1 when absent), identification
// succeeds with probability `accuracy`; on failure the attacker believes
// the target absent. When the target is absent and allow_false_positive is
// set, a false identification of a uniformly random side occurs with
// probability 1 - accuracy.
Identification identify(double accuracy, int target_side, bool allow_false_positive,
                        SplitMix64& rng);

struct VoteAction {
  enum Kind { kAbstain, kVoteFor, kVoteAgainst };
  Kind kind = kAbstain;
  int side = -1;  // battle side the vote refers to

  static VoteAction abstain() { return {}; }
};

// Acts only when the attacker believes the target identified: promote votes
// for the believed target, demote votes against it; otherwise abstains.
VoteAction passive_policy(const Identification& id, const AttackConfig& config);

// Enemy list: models currently ranked within enemy_window positions above
// the target. Behaves as passive when the target is believed identified.
// Otherwise: (i) target present but detection failed -> vote against the
// opponent if it is on the enemy list; (ii) target absent -> vote against
// an enemy if exactly one participant is an enemy.
VoteAction aggressive_policy(const Identification& id, const AttackConfig& config,
                             bool target_present, int target_side,
                             const std::vector<bool>& side_is_enemy);

std::vector<bool> enemy_flags(const LeaderboardState& state, const std::string& target,
                              int enemy_window);

struct TrajectoryPoint {
  size_t interactions = 0;
  int target_rank = 0;
  double target_rating = 0.0;
};

struct SimulationReport {
  size_t interactions = 0;        // battles presented to the attacker
  size_t adversarial_votes = 0;   // non-abstain actions
  bool reached = false;           // objective held at a refit boundary
  int final_target_rank = 0;
  std::vector<std::pair<std::string, int>> final_ranks;
  std::vector<TrajectoryPoint> trajectory;  // sampled at refit boundaries
};

// Deterministic given config.seed. Organic outcomes are sampled from the
// ratings fitted once on the initial log (voter behavior does not drift
// with the manipulated leaderboard). Stops when the objective holds at a
// refit boundary or the interaction budget is exhausted (reached = false).
SimulationReport run_simulation(const std::vector<BattleRecord>& initial_log,
                                const AttackConfig& config);

// Trajectory CSV: interaction,target_rank,target_rating.
void write_trajectory_csv(const SimulationReport& report, const std::string& path);

struct SweepCell {
  std::string target;
  int current_rank = 0;
  int objective_rank = 0;
  double mean_interactions = 0.0;
  double mean_votes = 0.0;
  size_t runs = 0;
  size_t reached = 0;
};

struct SweepTable {
  std::vector<std::string> targets;      // row order
  std::vector<int> objective_ranks;      // column order
  std::vector<SweepCell> cells;          // row-major; N/A cells omitted
};

// One simulation per (target, objective rank, seed); the objective
// direction comes from the target's current rank on the initial
// leaderboard. Cells report seed-ensemble means.
SweepTable run_sweep(const std::vector<BattleRecord>& initial_log,
                     const AttackConfig& base_config,
                     const std::vector<std::string>& targets,
                     const std::vector<int>& objective_ranks,
                     const std::vector<uint64_t>& seeds);

// Grid with cells formatted "interactions (votes)".
void write_sweep_csv(const SweepTable& table, const std::string& path);
std::string sweep_markdown(const SweepTable& table);

}  // namespace attrib

#endif  // ATTRIB_ARENASIM_HPP_
