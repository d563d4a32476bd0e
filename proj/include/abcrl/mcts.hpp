// Copyright 2026 The abcrl Authors.
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

/*!
  \file mcts.hpp
  \brief Budgeted UCT search over recipes with an optional alpha-weighted prior.

  Selection score of edge a: Q(s,a) + w(s,a) * c * sqrt(log(sum_b N(s,b)) / N(s,a)),
  with w = max(pi(s,a), 1e-6)^(1 - alpha) when a prior is attached, 1 otherwise.
*/

#pragma once

#include "actions.hpp"
#include "synthesis.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace abcrl {

using ActionDist = std::array<double, kNumActions>;

struct EdgeStats {
  uint32_t N = 0;
  double R_sum = 0.0;

  double Q() const { return N ? R_sum / N : 0.0; }
  bool operator==(const EdgeStats&) const = default;
};

using NodeStats = std::array<EdgeStats, kNumActions>;

/// Prior over actions for a recipe prefix on the search's design. `version`
/// changes whenever the underlying parameters change (fine-tuning).
struct PriorProvider {
  std::function<ActionDist(const Recipe&)> probs;
  std::function<uint64_t()> version;
};

enum class PriorMode {
  alpha_weighted,  // max(pi, floor)^(1 - alpha)
  direct,          // pi itself
};

struct MctsConfig {
  uint32_t K = 512;
  double c_uct = std::numbers::sqrt2;
  uint32_t L = kDefaultRecipeLength;
  double alpha = 0.0;
  uint32_t budget = 100;
  uint64_t seed = 1;
  PriorMode prior_mode = PriorMode::alpha_weighted;
  double prior_floor = 1e-6;

  void validate() const {
    if (K < 1) throw ConfigError("MCTS: K must be at least 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("MCTS: alpha must lie in [0, 1]");
    if (L < 1) throw ConfigError("MCTS: recipe length must be at least 1");
    if (budget < 1) throw ConfigError("MCTS: budget must be at least 1");
  }
};

inline double uct_bonus(const EdgeStats& e, uint64_t sibling_visit_total, double c_uct) {
  return c_uct * std::sqrt(std::log(static_cast<double>(sibling_visit_total)) / e.N);
}

inline double prior_weight(double pi, double alpha, PriorMode mode = PriorMode::alpha_weighted, double floor = 1e-6) {
  if (mode == PriorMode::direct) return pi;
  return std::pow(std::max(pi, floor), 1.0 - alpha);
}

/// Unvisited actions first (lowest id), then the highest score; ties go to the lowest id.
inline Action select_action(const NodeStats& edges, const std::optional<ActionDist>& prior, double alpha, double c_uct,
                            PriorMode mode = PriorMode::alpha_weighted, double floor = 1e-6) {
  uint64_t total = 0;
  for (uint32_t a = 0; a < kNumActions; ++a) {
    if (edges[a].N == 0) return action_from_id(a);
    total += edges[a].N;
  }
  uint32_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (uint32_t a = 0; a < kNumActions; ++a) {
    const double w = prior ? prior_weight((*prior)[a], alpha, mode, floor) : 1.0;
    const double score = edges[a].Q() + w * uct_bonus(edges[a], total, c_uct);
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return action_from_id(best);
}

/// Normalized visit counts.
inline ActionDist mcts_policy(const NodeStats& edges) {
  uint64_t total = 0;
  for (const auto& e : edges) total += e.N;
  if (total == 0) throw std::invalid_argument("mcts_policy: no visits");
  ActionDist pi{};
  for (uint32_t a = 0; a < kNumActions; ++a) pi[a] = static_cast<double>(edges[a].N) / static_cast<double>(total);
  return pi;
}

/// Committed decision at one level (for experience collection and fine-tuning).
struct LevelDecision {
  Recipe prefix;  // state before the action
  Action action;
  ActionDist pi_mcts;
};

struct SearchResult {
  std::optional<Recipe> best_recipe;
  double best_qor = 0.0;
  Recipe committed;
  std::vector<TraceRow> trace;
  std::vector<LevelDecision> decisions;
  uint32_t runs_used = 0;
};

class SearchTree {
 public:
  struct Node {
    NodeStats edges{};
    std::array<int32_t, kNumActions> child{};
    std::optional<ActionDist> prior;
    uint64_t prior_version = 0;
    uint32_t depth = 0;
    Node() { child.fill(-1); }
  };

  explicit SearchTree(uint32_t root_depth = 0) { nodes_.emplace_back().depth = root_depth; }

  Node& node(int32_t i) { return nodes_[static_cast<std::size_t>(i)]; }
  const Node& node(int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int32_t root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }

  int32_t expand(int32_t parent, Action a) {
    const auto depth = node(parent).depth + 1;
    nodes_.emplace_back().depth = depth;
    const auto id = static_cast<int32_t>(nodes_.size() - 1);
    node(parent).child[action_id(a)] = id;
    return id;
  }

  /// Moves the root to the child reached by a (creating it when absent).
  void commit(Action a) {
    int32_t c = node(root_).child[action_id(a)];
    if (c < 0) c = expand(root_, a);
    root_ = c;
  }

  void backup(const std::vector<std::pair<int32_t, Action>>& path, double reward) {
    for (auto [n, a] : path) {
      auto& e = node(n).edges[action_id(a)];
      ++e.N;
      e.R_sum += reward;
    }
  }

 private:
  std::vector<Node> nodes_;
  int32_t root_ = 0;
};

class Mcts {
 public:
  using CommitHook = std::function<void(const LevelDecision&)>;

  Mcts(SynthesisEvaluator& eval, MctsConfig cfg, std::optional<PriorProvider> prior = std::nullopt)
      : eval_(eval), cfg_(cfg), prior_(std::move(prior)), rng_(cfg.seed) {
    cfg_.validate();
  }

  void set_commit_hook(CommitHook hook) { hook_ = std::move(hook); }
  const SearchTree& tree() const { return tree_; }

  /// Result of a rollout from `prefix`: random completion, then synthesis.
  std::optional<double> rollout(Recipe prefix) {
    while (prefix.size() < cfg_.L) prefix.push(action_from_id(static_cast<uint32_t>(rng_() % kNumActions)));
    auto o = eval_.evaluate(prefix);
    if (!o) return std::nullopt;
    return o->reward;
  }

  /// One selection / expansion / rollout / backup pass. False when the budget ran out.
  bool simulate() {
    std::vector<std::pair<int32_t, Action>> path;
    int32_t n = tree_.root();
    Recipe prefix = committed_;
    std::optional<double> reward;
    while (true) {
      if (prefix.size() == cfg_.L) {
        auto o = eval_.evaluate(prefix);
        if (!o) return false;
        reward = o->reward;
        break;
      }
      auto& node = tree_.node(n);
      const Action a = select_action(node.edges, prior_for(n, prefix), cfg_.alpha, cfg_.c_uct, cfg_.prior_mode, cfg_.prior_floor);
      path.emplace_back(n, a);
      prefix.push(a);
      const bool fresh = tree_.node(n).edges[action_id(a)].N == 0;
      int32_t c = tree_.node(n).child[action_id(a)];
      if (c < 0) c = tree_.expand(n, a);
      n = c;
      if (fresh) {
        reward = rollout(prefix);
        if (!reward) return false;
        break;
      }
    }
    tree_.backup(path, *reward);
    return true;
  }

  SearchResult run() {
    SearchResult res;
    bool out_of_budget = false;
    for (uint32_t level = committed_.size(); level < cfg_.L && !out_of_budget; ++level) {
      for (uint32_t k = 0; k < cfg_.K; ++k) {
        if (!simulate()) {
          out_of_budget = true;
          break;
        }
      }
      const auto& root = tree_.node(tree_.root());
      uint64_t visits = 0;
      for (const auto& e : root.edges) visits += e.N;
      if (visits == 0) break;
      uint32_t best = 0;
      for (uint32_t a = 1; a < kNumActions; ++a) {
        if (root.edges[a].N > root.edges[best].N) best = a;
      }
      LevelDecision d{committed_, action_from_id(best), mcts_policy(root.edges)};
      res.decisions.push_back(d);
      committed_.push(d.action);
      tree_.commit(d.action);
      if (hook_) hook_(d);
    }
    res.best_recipe = eval_.best_recipe();
    res.best_qor = eval_.best_qor();
    res.committed = committed_;
    res.trace = eval_.trace();
    res.runs_used = eval_.runs_used();
    return res;
  }

 private:
  std::optional<ActionDist> prior_for(int32_t n, const Recipe& prefix) {
    if (!prior_) return std::nullopt;
    auto& node = tree_.node(n);
    const uint64_t v = prior_->version ? prior_->version() : 0;
    if (!node.prior || node.prior_version != v) {
      node.prior = prior_->probs(prefix);
      node.prior_version = v;
    }
    return node.prior;
  }

  SynthesisEvaluator& eval_;
  MctsConfig cfg_;
  std::optional<PriorProvider> prior_;
  std::mt19937_64 rng_;
  SearchTree tree_;
  Recipe committed_{cfg_.L};
  CommitHook hook_;
};

inline SearchResult run_search(SynthesisEvaluator& eval, const MctsConfig& cfg, std::optional<PriorProvider> prior = std::nullopt) {
  Mcts m(eval, cfg, std::move(prior));
  return m.run();
}

}  // namespace abcrl
