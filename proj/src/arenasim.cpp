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

#include "attrib/arenasim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace attrib {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log sigmoid(x) = -softplus(-x)
double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double penalized_nll(const std::vector<double>& wins, const Eigen::VectorXd& r, double ridge) {
  const auto m = static_cast<size_t>(r.size());
  double nll = 0.0;
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double w = wins[i * m + j];
      if (w > 0.0) nll -= w * log_sigmoid(r[i] - r[j]);
    }
  }
  return nll + ridge * r.squaredNorm();
}

}  // namespace

// Damped Newton on the ridge-penalized Bradley-Terry negative log-likelihood
// over aggregated win counts.
std::vector<double> fit_bt_counts(const std::vector<std::string>& models,
                                  const std::vector<double>& wins, const BtConfig& config,
                                  const std::vector<double>* warm_start) {
  const size_t m = models.size();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
  if (warm_start != nullptr) {
    if (warm_start->size() != m) throw std::invalid_argument("fit_bt: warm start size mismatch");
    for (size_t i = 0; i < m; ++i) r[i] = (*warm_start)[i];
  }

  Eigen::VectorXd grad(m);
  Eigen::MatrixXd hess(m, m);
  for (int iter = 0; iter < config.max_iter; ++iter) {
    grad.setZero();
    hess.setZero();
    for (size_t i = 0; i < m; ++i) {
      for (size_t j = i + 1; j < m; ++j) {
        const double w_ij = wins[i * m + j];
        const double w_ji = wins[j * m + i];
        const double total = w_ij + w_ji;
        if (total == 0.0) continue;
        const double p = sigmoid(r[i] - r[j]);  // P(i beats j)
        // d(nll)/dr_i over this pair: expected wins minus observed wins.
        const double g = total * p - w_ij;
        grad[i] += g;
        grad[j] -= g;
        const double curv = total * p * (1.0 - p);
        hess(i, i) += curv;
        hess(j, j) += curv;
        hess(i, j) -= curv;
        hess(j, i) -= curv;
      }
      grad[i] += 2.0 * config.ridge * r[i];
      hess(i, i) += 2.0 * config.ridge;
    }
    if (grad.lpNorm<Eigen::Infinity>() < config.tol) break;

    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    const double f0 = penalized_nll(wins, r, config.ridge);
    double scale = 1.0;
    Eigen::VectorXd candidate;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      candidate = r - scale * step;
      if (penalized_nll(wins, candidate, config.ridge) <= f0) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
    r = candidate;
  }

  r.array() -= r.mean();  // gauge fixing
  return {r.data(), r.data() + m};
}

std::vector<double> fit_bt(const std::vector<std::string>& models,
                           const std::vector<BattleRecord>& battles, const BtConfig& config,
                           const std::vector<double>* warm_start) {
  const size_t m = models.size();
  if (m == 0) throw std::invalid_argument("fit_bt: no models");
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < m; ++i) {
    if (!index.emplace(models[i], i).second) {
      throw std::invalid_argument("fit_bt: duplicate model '" + models[i] + "'");
    }
  }
  std::vector<double> wins(m * m, 0.0);
  std::vector<size_t> appearances(m, 0);
  for (const auto& battle : battles) {
    const auto a = index.find(battle.model_a);
    const auto b = index.find(battle.model_b);
    if (a == index.end() || b == index.end()) {
      throw std::invalid_argument("fit_bt: battle references model outside the model set");
    }
    ++appearances[a->second];
    ++appearances[b->second];
    switch (battle.outcome) {
      case Outcome::kAWins:
        wins[a->second * m + b->second] += 1.0;
        break;
      case Outcome::kBWins:
        wins[b->second * m + a->second] += 1.0;
        break;
      case Outcome::kTie:
        if (config.tie_policy == TiePolicy::kHalfWin) {
          wins[a->second * m + b->second] += 0.5;
          wins[b->second * m + a->second] += 0.5;
        }
        break;
    }
  }
  for (size_t i = 0; i < m; ++i) {
    if (appearances[i] == 0) {
      throw std::invalid_argument("fit_bt: model '" + models[i] + "' has no battles");
    }
  }
  return fit_bt_counts(models, wins, config, warm_start);
}

std::vector<int> ranks_from_ratings(const std::vector<std::string>& models,
                                    const std::vector<double>& ratings) {
  std::vector<size_t> order(models.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (ratings[a] != ratings[b]) return ratings[a] > ratings[b];
    return models[a] < models[b];
  });
  std::vector<int> ranks(models.size(), 0);
  for (size_t pos = 0; pos < order.size(); ++pos) {
    ranks[order[pos]] = static_cast<int>(pos + 1);
  }
  return ranks;
}

LeaderboardState LeaderboardState::initialize(std::vector<std::string> models,
                                              const std::vector<BattleRecord>& initial_log,
                                              const BtConfig& config) {
  LeaderboardState state;
  state.models_ = std::move(models);
  for (size_t i = 0; i < state.models_.size(); ++i) {
    if (!state.index_.emplace(state.models_[i], i).second) {
      throw std::invalid_argument("duplicate model '" + state.models_[i] + "'");
    }
  }
  state.aggregate_policy_ = config.tie_policy;
  state.win_counts_.assign(state.models_.size() * state.models_.size(), 0.0);
  state.appearances_.assign(state.models_.size(), 0);
  for (const auto& battle : initial_log) state.aggregate(battle);
  state.log_size_ = initial_log.size();
  for (size_t i = 0; i < state.models_.size(); ++i) {
    if (state.appearances_[i] == 0) {
      throw std::invalid_argument("model '" + state.models_[i] + "' has no battles");
    }
  }
  state.ratings_ = fit_bt_counts(state.models_, state.win_counts_, config, nullptr);
  state.ranks_ = ranks_from_ratings(state.models_, state.ratings_);
  return state;
}

void LeaderboardState::aggregate(const BattleRecord& battle) {
  const size_t m = models_.size();
  const size_t a = model_index(battle.model_a);
  const size_t b = model_index(battle.model_b);
  ++appearances_[a];
  ++appearances_[b];
  switch (battle.outcome) {
    case Outcome::kAWins:
      win_counts_[a * m + b] += 1.0;
      break;
    case Outcome::kBWins:
      win_counts_[b * m + a] += 1.0;
      break;
    case Outcome::kTie:
      if (aggregate_policy_ == TiePolicy::kHalfWin) {
        win_counts_[a * m + b] += 0.5;
        win_counts_[b * m + a] += 0.5;
      }
      break;
  }
}

void LeaderboardState::append(BattleRecord battle) {
  aggregate(battle);
  ++log_size_;
  ++votes_since_refit_;
}

bool LeaderboardState::refit_if_due(size_t interval, const BtConfig& config) {
  if (votes_since_refit_ < interval) return false;
  refit(config);
  return true;
}

void LeaderboardState::refit(const BtConfig& config) {
  ratings_ = fit_bt_counts(models_, win_counts_, config, &ratings_);
  ranks_ = ranks_from_ratings(models_, ratings_);
  votes_since_refit_ = 0;
}

size_t LeaderboardState::model_index(const std::string& model) const {
  const auto it = index_.find(model);
  if (it == index_.end()) throw std::invalid_argument("unknown model '" + model + "'");
  return it->second;
}

int LeaderboardState::rank_of(const std::string& model) const {
  return ranks_[model_index(model)];
}

void AttackConfig::validate(size_t model_count) const {
  if (target.empty()) throw std::invalid_argument("attack target must be set");
  if (!(detector_accuracy >= 0.0 && detector_accuracy <= 1.0)) {
    throw std::invalid_argument("detector_accuracy must be in [0, 1]");
  }
  if (max_interactions < 1) throw std::invalid_argument("interaction budget must be >= 1");
  if (objective.rank < 1 || objective.rank > static_cast<int>(model_count)) {
    throw std::invalid_argument("objective rank " + std::to_string(objective.rank) +
                                " invalid for " + std::to_string(model_count) + " models");
  }
  if (enemy_window < 0) throw std::invalid_argument("enemy_window must be >= 0");
  if (refit_interval < 1) throw std::invalid_argument("refit_interval must be >= 1");
}

BattlePair sample_battle(size_t model_count, SplitMix64& rng) {
  if (model_count < 2) throw std::invalid_argument("need at least two models to battle");
  BattlePair pair;
  pair.a = static_cast<size_t>(rng.below(model_count));
  pair.b = static_cast<size_t>(rng.below(model_count - 1));
  if (pair.b >= pair.a) ++pair.b;
  return pair;
}

Outcome simulate_outcome(double rating_a, double rating_b, double tie_prob, SplitMix64& rng) {
  if (tie_prob > 0.0 && rng.next_double() < tie_prob) return Outcome::kTie;
  return rng.next_double() < sigmoid(rating_a - rating_b) ? Outcome::kAWins : Outcome::kBWins;
}

Identification identify(double accuracy, int target_side, bool allow_false_positive,
                        SplitMix64& rng) {
  Identification id;
  if (target_side >= 0) {
    if (rng.bernoulli(accuracy)) {
      id.believed_present = true;
      id.believed_side = target_side;
    }
    // On failure the attacker believes the target absent.
  } else if (allow_false_positive && rng.bernoulli(1.0 - accuracy)) {
    id.believed_present = true;
    id.believed_side = rng.bernoulli(0.5) ? 1 : 0;
  }
  return id;
}

VoteAction passive_policy(const Identification& id, const AttackConfig& config) {
  if (!id.believed_present) return VoteAction::abstain();
  VoteAction action;
  action.kind = config.objective.kind == ObjectiveKind::kPromoteTo ? VoteAction::kVoteFor
                                                                   : VoteAction::kVoteAgainst;
  action.side = id.believed_side;
  return action;
}

VoteAction aggressive_policy(const Identification& id, const AttackConfig& config,
                             bool target_present, int target_side,
                             const std::vector<bool>& side_is_enemy) {
  if (id.believed_present) return passive_policy(id, config);
  if (target_present) {
    // Detection failed but the opponent may still be worth down-ranking.
    const int opponent = 1 - target_side;
    if (side_is_enemy[opponent]) {
      return {VoteAction::kVoteAgainst, opponent};
    }
    return VoteAction::abstain();
  }
  if (side_is_enemy[0] != side_is_enemy[1]) {
    return {VoteAction::kVoteAgainst, side_is_enemy[0] ? 0 : 1};
  }
  return VoteAction::abstain();
}

std::vector<bool> enemy_flags(const LeaderboardState& state, const std::string& target,
                              int enemy_window) {
  const int target_rank = state.rank_of(target);
  std::vector<bool> enemies(state.models().size(), false);
  for (size_t i = 0; i < state.models().size(); ++i) {
    const int rank = state.ranks()[i];
    enemies[i] = rank < target_rank && rank >= target_rank - enemy_window;
  }
  return enemies;
}

SimulationReport run_simulation(const std::vector<BattleRecord>& initial_log,
                                const AttackConfig& config) {
  std::set<std::string> model_set;
  for (const auto& battle : initial_log) {
    model_set.insert(battle.model_a);
    model_set.insert(battle.model_b);
  }
  std::vector<std::string> models(model_set.begin(), model_set.end());
  config.validate(models.size());
  if (model_set.count(config.target) == 0) {
    throw std::invalid_argument("target model '" + config.target + "' not in battle log");
  }

  LeaderboardState state = LeaderboardState::initialize(models, initial_log, config.bt);
  const std::vector<double> organic_ratings = state.ratings();  // frozen voter behavior
  const size_t target_idx = state.model_index(config.target);

  SimulationReport report;
  report.trajectory.push_back({0, state.rank_of(config.target), state.ratings()[target_idx]});
  if (config.objective.satisfied(state.rank_of(config.target))) {
    report.reached = true;
    report.final_target_rank = state.rank_of(config.target);
    for (size_t i = 0; i < models.size(); ++i) {
      report.final_ranks.emplace_back(models[i], state.ranks()[i]);
    }
    return report;
  }

  SplitMix64 rng(config.seed);
  std::vector<bool> enemies;
  if (config.policy == PolicyKind::kAggressive) {
    enemies = enemy_flags(state, config.target, config.enemy_window);
  }

  while (report.interactions < config.max_interactions) {
    const BattlePair pair = sample_battle(models.size(), rng);
    ++report.interactions;

    const int target_side = pair.a == target_idx ? 0 : pair.b == target_idx ? 1 : -1;
    const Identification id =
        identify(config.detector_accuracy, target_side, config.false_positives, rng);

    VoteAction action;
    if (config.policy == PolicyKind::kPassive) {
      action = passive_policy(id, config);
    } else {
      const std::vector<bool> side_enemy = {enemies[pair.a], enemies[pair.b]};
      action = aggressive_policy(id, config, target_side >= 0, target_side, side_enemy);
    }

    BattleRecord battle;
    battle.model_a = models[pair.a];
    battle.model_b = models[pair.b];
    battle.index = state.log_size();
    if (action.kind != VoteAction::kAbstain) {
      const int winner_side = action.kind == VoteAction::kVoteFor ? action.side : 1 - action.side;
      battle.outcome = winner_side == 0 ? Outcome::kAWins : Outcome::kBWins;
      ++report.adversarial_votes;
    } else {
      battle.outcome = simulate_outcome(organic_ratings[pair.a], organic_ratings[pair.b],
                                        config.organic_tie_prob, rng);
    }
    state.append(std::move(battle));

    if (state.refit_if_due(config.refit_interval, config.bt)) {
      report.trajectory.push_back(
          {report.interactions, state.rank_of(config.target), state.ratings()[target_idx]});
      if (config.policy == PolicyKind::kAggressive) {
        enemies = enemy_flags(state, config.target, config.enemy_window);
      }
      if (config.objective.satisfied(state.rank_of(config.target))) {
        report.reached = true;
        break;
      }
    }
  }

  report.final_target_rank = state.rank_of(config.target);
  for (size_t i = 0; i < models.size(); ++i) {
    report.final_ranks.emplace_back(models[i], state.ranks()[i]);
  }
  return report;
}

void write_trajectory_csv(const SimulationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory csv: " + path);
  out.precision(17);
  out << "interaction,target_rank,target_rating\n";
  for (const auto& point : report.trajectory) {
    out << point.interactions << ',' << point.target_rank << ',' << point.target_rating << '\n';
  }
}

SweepTable run_sweep(const std::vector<BattleRecord>& initial_log,
                     const AttackConfig& base_config, const std::vector<std::string>& targets,
                     const std::vector<int>& objective_ranks,
                     const std::vector<uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("run_sweep: no seeds");
  std::set<std::string> model_set;
  for (const auto& battle : initial_log) {
    model_set.insert(battle.model_a);
    model_set.insert(battle.model_b);
  }
  std::vector<std::string> models(model_set.begin(), model_set.end());
  LeaderboardState initial = LeaderboardState::initialize(models, initial_log, base_config.bt);

  SweepTable table;
  table.targets = targets;
  table.objective_ranks = objective_ranks;
  for (const auto& target : targets) {
    const int current_rank = initial.rank_of(target);
    for (const int objective_rank : objective_ranks) {
      if (objective_rank == current_rank) continue;
      SweepCell cell;
      cell.target = target;
      cell.current_rank = current_rank;
      cell.objective_rank = objective_rank;
      for (const uint64_t seed : seeds) {
        AttackConfig config = base_config;
        config.target = target;
        config.seed = seed;
        config.objective.kind = objective_rank < current_rank ? ObjectiveKind::kPromoteTo
                                                              : ObjectiveKind::kDemoteTo;
        config.objective.rank = objective_rank;
        const SimulationReport run = run_simulation(initial_log, config);
        cell.mean_interactions += static_cast<double>(run.interactions);
        cell.mean_votes += static_cast<double>(run.adversarial_votes);
        cell.reached += run.reached ? 1 : 0;
        ++cell.runs;
      }
      cell.mean_interactions /= static_cast<double>(cell.runs);
      cell.mean_votes /= static_cast<double>(cell.runs);
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

namespace {

std::string format_cell(const SweepCell& cell) {
  std::ostringstream out;
  out << std::llround(cell.mean_interactions) << " (" << std::llround(cell.mean_votes) << ")";
  return out.str();
}

const SweepCell* find_cell(const SweepTable& table, const std::string& target, int rank) {
  for (const auto& cell : table.cells) {
    if (cell.target == target && cell.objective_rank == rank) return &cell;
  }
  return nullptr;
}

}  // namespace

void write_sweep_csv(const SweepTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sweep csv: " + path);
  out << "target,current_rank";
  for (const int rank : table.objective_ranks) out << ",rank_" << rank;
  out << '\n';
  for (const auto& target : table.targets) {
    int current = 0;
    for (const auto& cell : table.cells) {
      if (cell.target == target) current = cell.current_rank;
    }
    out << target << ',' << current;
    for (const int rank : table.objective_ranks) {
      const SweepCell* cell = find_cell(table, target, rank);
      out << ',' << (cell != nullptr ? format_cell(*cell) : "N/A");
    }
    out << '\n';
  }
}

std::string sweep_markdown(const SweepTable& table) {
  std::ostringstream out;
  out << "| Target model | Current rank |";
  for (const int rank : table.objective_ranks) out << " Target rank: " << rank << " |";
  out << "\n|---|---|";
  for (size_t i = 0; i < table.objective_ranks.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& target : table.targets) {
    int current = 0;
    for (const auto& cell : table.cells) {
      if (cell.target == target) current = cell.current_rank;
    }
    out << "| " << target << " | " << current << " |";
    for (const int rank : table.objective_ranks) {
      const SweepCell* cell = find_cell(table, target, rank);
      out << ' ' << (cell != nullptr ? format_cell(*cell) : "N/A") << " |";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace attrib
