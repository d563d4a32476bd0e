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
  \file synthesis.hpp
  \brief Reward normalization and the budgeted, memoizing recipe evaluator.
*/

#pragma once

#include "actions.hpp"
#include "aig.hpp"
#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace abcrl {

/// 1 - ratio while the recipe stays within twice the baseline ADP, -1 beyond; clipped to [-1, 1].
inline double normalize_reward(double adp_recipe, double adp_baseline) {
  if (!(adp_recipe > 0.0) || !(adp_baseline > 0.0)) throw NumericError("reward: area-delay proxy must be positive");
  const double ratio = adp_recipe / adp_baseline;
  const double r = ratio < 2.0 ? 1.0 - ratio : -1.0;
  return std::clamp(r, -1.0, 1.0);
}

/// Area-delay proxy used inside the search. A design reduced to wires keeps
/// a floor of one node so that rewards stay defined.
inline double search_adp(const AigStats& s) {
  return static_cast<double>(std::max<uint32_t>(s.num_nodes, 1)) * std::max<uint32_t>(s.num_levels, 1);
}

struct SynthesisOutcome {
  AigStats stats;
  double qor = 0.0;
  double reward = 0.0;
};

struct TraceRow {
  uint32_t run_index = 0;  // 1-based
  std::string recipe;
  uint32_t nodes = 0;
  uint32_t levels = 0;
  double qor = 0.0;
  double best_qor = 0.0;
};

/// Evaluates complete recipes on one design. Each distinct recipe is one
/// synthesis run charged to the budget; repeats are served from the memo.
class SynthesisEvaluator {
 public:
  SynthesisEvaluator(Aig g0, double baseline_adp, uint32_t budget = std::numeric_limits<uint32_t>::max(),
                     TransformParams params = {}, std::size_t prefix_cache_limit = 4096)
      : g0_(std::move(g0)), baseline_adp_(baseline_adp), budget_(budget), params_(params), cache_limit_(prefix_cache_limit) {
    if (!(baseline_adp_ > 0.0)) throw NumericError("baseline area-delay proxy must be positive");
  }

  const Aig& design() const { return g0_; }
  double baseline_adp() const { return baseline_adp_; }
  uint32_t budget() const { return budget_; }
  uint32_t runs_used() const { return runs_; }
  bool exhausted() const { return runs_ >= budget_; }
  const std::vector<TraceRow>& trace() const { return trace_; }
  double best_qor() const { return best_qor_; }
  const std::optional<Recipe>& best_recipe() const { return best_recipe_; }
  double reward_min() const { return reward_min_; }
  double reward_max() const { return reward_max_; }

  bool memoized(const Recipe& r) const { return memo_.count(r.str()) != 0; }

  /// Nothing when the recipe is new and the budget is spent.
  std::optional<SynthesisOutcome> evaluate(const Recipe& r) {
    const std::string key = r.str();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (exhausted()) return std::nullopt;
    const Aig out = synthesize(r);
    SynthesisOutcome o;
    o.stats = stats(out);
    const double adp = search_adp(o.stats);
    o.qor = 1.0 / adp;
    o.reward = normalize_reward(adp, baseline_adp_);
    ++runs_;
    reward_min_ = std::min(reward_min_, o.reward);
    reward_max_ = std::max(reward_max_, o.reward);
    memo_.emplace(key, o);
    if (o.qor > best_qor_) {
      best_qor_ = o.qor;
      best_recipe_ = r;
    }
    trace_.push_back({runs_, key, o.stats.num_nodes, o.stats.num_levels, o.qor, best_qor_});
    return o;
  }

  /// AIG after a (possibly partial) recipe, reusing cached prefixes. Not charged.
  Aig synthesize(const Recipe& r) {
    uint32_t start = 0;
    const Aig* base = &g0_;
    for (uint32_t k = r.size(); k > 0; --k) {
      auto it = prefix_cache_.find(r.prefix(k).str());
      if (it != prefix_cache_.end()) {
        start = k;
        base = &it->second;
        break;
      }
    }
    Aig cur = *base;
    for (uint32_t k = start; k < r.size(); ++k) {
      cur = apply_action(cur, r[k], params_);
      if (prefix_cache_.size() >= cache_limit_) prefix_cache_.clear();
      prefix_cache_.emplace(r.prefix(k + 1).str(), cur);
    }
    return cur;
  }

 private:
  Aig g0_;
  double baseline_adp_;
  uint32_t budget_;
  TransformParams params_;
  std::size_t cache_limit_;
  uint32_t runs_ = 0;
  double best_qor_ = 0.0;
  std::optional<Recipe> best_recipe_;
  double reward_min_ = std::numeric_limits<double>::infinity();
  double reward_max_ = -std::numeric_limits<double>::infinity();
  std::unordered_map<std::string, SynthesisOutcome> memo_;
  std::unordered_map<std::string, Aig> prefix_cache_;
  std::vector<TraceRow> trace_;
};

inline double resyn2_adp(const Aig& g, const TransformParams& p = {}) {
  return search_adp(stats(apply_recipe(g, resyn2(), p).aig));
}

}  // namespace abcrl
