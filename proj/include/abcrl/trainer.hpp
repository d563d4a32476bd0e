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
  \file trainer.hpp
  \brief Experience collection, policy pre-training and online fine-tuning.
*/

#pragma once

#include "errors.hpp"
#include "generators.hpp"
#include "mcts.hpp"
#include "policy.hpp"
#include "retrieval.hpp"
#include "synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace abcrl {

struct Experience {
  uint32_t design = 0;  // index into the training set
  Recipe state;
  Action action = Action::balance;
  Recipe next_state;
  ActionDist pi_mcts{};
};

/// Bounded FIFO of experiences.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay buffer capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  const Experience& operator[](std::size_t i) const { return entries_[i]; }

  void push(Experience e) {
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(std::move(e));
  }

  /// Up to k distinct entry indices, uniformly without replacement.
  template <typename Rng>
  std::vector<std::size_t> sample(std::size_t k, Rng& rng) const {
    std::vector<std::size_t> idx(entries_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, idx.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  std::size_t capacity_;
  std::deque<Experience> entries_;
};

/// resyn2 proxy ADP per design, computed once.
class RewardBaselines {
 public:
  explicit RewardBaselines(TransformParams p = {}) : params_(p) {}

  double get(const std::string& name, const Aig& g) {
    if (auto it = cache_.find(name); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
    ++computations_;
    const double v = resyn2_adp(g, params_);
    if (!(v > 0.0)) throw NumericError("resyn2 baseline of " + name + " is not positive");
    cache_.emplace(name, v);
    return v;
  }

  uint64_t hits() const { return hits_; }
  uint64_t computations() const { return computations_; }

 private:
  TransformParams params_;
  std::map<std::string, double> cache_;
  uint64_t hits_ = 0;
  uint64_t computations_ = 0;
};

struct TrainDesign {
  std::string name;
  Aig aig;
};

struct TrainConfig {
  uint32_t epochs = 50;
  uint32_t K = 512;
  double lr = 0.01;
  uint64_t seed = 1;
  uint32_t L = kDefaultRecipeLength;
  uint32_t batch_size = 32;
  double c_uct = std::numbers::sqrt2;
  PolicyConfig policy;
  TransformParams transforms;

  void validate() const {
    if (K < 1) throw ConfigError("train: K must be at least 1");
    if (!(lr >= 0.0)) throw ConfigError("train: learning rate must be non-negative");
    if (L < 1) throw ConfigError("train: L must be at least 1");
    if (batch_size < 1) throw ConfigError("train: batch size must be at least 1");
  }
};

struct TrainLogRow {
  uint32_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::size_t buffer_size = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  PolicyParams params;
  EmbeddingIndex index;
  std::vector<TrainLogRow> log;
  double reward_min = std::numeric_limits<double>::infinity();
  double reward_max = -std::numeric_limits<double>::infinity();
  uint64_t experiences_collected = 0;
};

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return detail::splitmix64(s);
}

/// One collection pass: L committed levels of K-simulation MCTS per design,
/// one experience per level.
inline uint64_t collect_experience(std::vector<std::unique_ptr<SynthesisEvaluator>>& evals, const std::vector<GraphInput>& graphs,
                                   const PolicyParams& params, const TrainConfig& cfg, uint64_t pass_seed, ReplayBuffer& buffer) {
  uint64_t added = 0;
  for (uint32_t d = 0; d < evals.size(); ++d) {
    MctsConfig mc;
    mc.K = cfg.K;
    mc.L = cfg.L;
    mc.c_uct = cfg.c_uct;
    mc.alpha = 0.0;
    mc.budget = std::numeric_limits<uint32_t>::max();
    mc.seed = mix_seed(pass_seed, d);
    const RowVectorXd hG = gcn_embed(params, graphs[d]);
    PriorProvider prior;
    prior.probs = [&params, hG](const Recipe& prefix) { return policy_forward(params, hG, prefix); };
    Mcts search(*evals[d], mc, prior);
    search.set_commit_hook([&](const LevelDecision& dec) {
      buffer.push({d, dec.prefix, dec.action, dec.prefix.with(dec.action), dec.pi_mcts});
      ++added;
    });
    search.run();
  }
  return added;
}

inline EmbeddingIndex build_index(const PolicyParams& p, const std::vector<TrainDesign>& designs) {
  EmbeddingIndex idx(p.cfg.d * 2);
  for (const auto& d : designs) idx.add(d.name, gcn_embed(p, make_graph_input(d.aig)));
  return idx;
}

/// Pre-training: per epoch collect, sample L * N_tr experiences, minibatch Adam steps.
inline TrainResult train(const std::vector<TrainDesign>& designs, TrainConfig cfg, RewardBaselines* baselines = nullptr) {
  cfg.validate();
  if (designs.empty()) throw ConfigError("train: no designs");
  cfg.policy.L = cfg.L;
  RewardBaselines local(cfg.transforms);
  RewardBaselines& base = baselines ? *baselines : local;

  TrainResult res{init_policy(cfg.policy, cfg.seed), {}, {}};
  const auto n = static_cast<uint32_t>(designs.size());
  std::vector<GraphInput> graphs;
  std::vector<std::unique_ptr<SynthesisEvaluator>> evals;
  for (const auto& d : designs) {
    graphs.push_back(make_graph_input(d.aig));
    evals.push_back(std::make_unique<SynthesisEvaluator>(d.aig, base.get(d.name, d.aig), std::numeric_limits<uint32_t>::max(), cfg.transforms));
  }
  ReplayBuffer buffer(std::size_t{2} * cfg.L * n);
  AdamState adam = make_adam(res.params);
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x5a4d));
  const auto t0 = std::chrono::steady_clock::now();

  for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    try {
      res.experiences_collected += collect_experience(evals, graphs, res.params, cfg, mix_seed(cfg.seed, epoch), buffer);
      const auto picked = buffer.sample(std::size_t{cfg.L} * n, rng);
      double loss_sum = 0.0;
      for (std::size_t b = 0; b < picked.size(); b += cfg.batch_size) {
        std::vector<PolicySample> batch;
        for (std::size_t i = b; i < std::min(picked.size(), b + cfg.batch_size); ++i) {
          const auto& e = buffer[picked[i]];
          batch.push_back({&graphs[e.design], e.state, e.pi_mcts});
        }
        loss_sum += grad_step(res.params, batch, adam, cfg.lr, BnMode::train) * static_cast<double>(batch.size());
      }
      const double mean = picked.empty() ? 0.0 : loss_sum / static_cast<double>(picked.size());
      if (!std::isfinite(mean)) throw NumericError("non-finite mean loss");
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      res.log.push_back({epoch, mean, buffer.size(), secs});
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
  }
  for (const auto& ev : evals) {
    if (ev->runs_used() == 0) continue;
    res.reward_min = std::min(res.reward_min, ev->reward_min());
    res.reward_max = std::max(res.reward_max, ev->reward_max());
  }
  res.index = build_index(res.params, designs);
  return res;
}

struct FineTuneResult {
  SearchResult search;
  PolicyParams params;
  std::vector<Experience> experiences;
  uint64_t grad_steps = 0;
};

/// MCTS+L with a gradient step on this design's experiences after every
/// committed level. Works on a copy; `params` is never modified.
inline FineTuneResult fine_tune_online(const PolicyParams& params, SynthesisEvaluator& eval, const MctsConfig& mcfg, double lr = 0.001,
                                       uint32_t batch_size = 32) {
  FineTuneResult out;
  out.params = params;
  AdamState adam = make_adam(out.params);
  const GraphInput graph = make_graph_input(eval.design());
  uint64_t version = 0;
  auto prior = make_prior(out.params, eval.design(), [&version] { return version; });
  Mcts search(eval, mcfg, prior);
  search.set_commit_hook([&](const LevelDecision& dec) {
    out.experiences.push_back({0, dec.prefix, dec.action, dec.prefix.with(dec.action), dec.pi_mcts});
    std::vector<PolicySample> batch;
    const std::size_t first = out.experiences.size() > batch_size ? out.experiences.size() - batch_size : 0;
    for (std::size_t i = first; i < out.experiences.size(); ++i) batch.push_back({&graph, out.experiences[i].state, out.experiences[i].pi_mcts});
    grad_step(out.params, batch, adam, lr, BnMode::frozen);
    ++out.grad_steps;
    ++version;
  });
  out.search = search.run();
  return out;
}

}  // namespace abcrl
