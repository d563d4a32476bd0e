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

#include "abcrl/mcts.hpp"
#include "abcrl/synthesis.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace abcrl;

namespace {

SynthesisEvaluator make_eval(const Aig& g, uint32_t budget) { return SynthesisEvaluator(g, resyn2_adp(g), budget); }

MctsConfig small_config(uint32_t L, uint32_t K, uint32_t budget, uint64_t seed) {
  MctsConfig c;
  c.L = L;
  c.K = K;
  c.budget = budget;
  c.seed = seed;
  return c;
}

PriorProvider constant_prior(ActionDist d) {
  PriorProvider p;
  p.probs = [d](const Recipe&) { return d; };
  return p;
}

ActionDist uniform_dist() {
  ActionDist d;
  d.fill(1.0 / 7.0);
  return d;
}

ActionDist random_dist(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  ActionDist d;
  double s = 0.0;
  for (auto& x : d) s += (x = u(rng));
  for (auto& x : d) x /= s;
  return d;
}

std::vector<std::string> recipes(const std::vector<TraceRow>& t) {
  std::vector<std::string> out;
  for (const auto& r : t) out.push_back(r.recipe);
  return out;
}

}  // namespace

TEST(Uct, BonusExamples) {
  EXPECT_DOUBLE_EQ(uct_bonus({1, 0.0}, 1, 1.0), 0.0);
  EXPECT_NEAR(uct_bonus({1, 0.0}, 3, 1.0), std::sqrt(std::log(3.0)), 1e-15);
  // total = e is not an integer count; check the analytic form at N=1 directly.
  EXPECT_NEAR(1.0 * std::sqrt(std::log(std::numbers::e) / 1.0), 1.0, 1e-15);
  EXPECT_GT(uct_bonus({2, 0.0}, 10, 1.0), uct_bonus({4, 0.0}, 10, 1.0));
}

TEST(Select, UnvisitedFirstInIdOrder) {
  NodeStats e{};
  EXPECT_EQ(select_action(e, std::nullopt, 0.0, 1.0), Action::balance);
  e[0] = {1, 0.5};
  e[1] = {1, 0.5};
  EXPECT_EQ(select_action(e, std::nullopt, 0.0, 1.0), Action::rewrite_z);
}

TEST(Select, PriorEndpoints) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    NodeStats e;
    for (auto& x : e) {
      x.N = 1 + rng() % 20;
      x.R_sum = x.N * (static_cast<double>(rng() % 2001) / 1000.0 - 1.0);
    }
    const ActionDist pi = random_dist(trial);
    EXPECT_EQ(select_action(e, pi, 1.0, 1.4), select_action(e, std::nullopt, 0.0, 1.4));
  }
  for (double p : {0.3, 0.01, 1e-7}) EXPECT_DOUBLE_EQ(prior_weight(p, 0.0), std::max(p, 1e-6));
  EXPECT_DOUBLE_EQ(prior_weight(0.3, 0.0, PriorMode::direct), 0.3);
  EXPECT_DOUBLE_EQ(prior_weight(0.3, 1.0), 1.0);
}

TEST(Select, PeakedPriorBreaksTie) {
  NodeStats e;
  for (auto& x : e) x = {3, 0.6};
  ActionDist pi;
  pi.fill(0.05);
  pi[action_id(Action::rewrite)] = 0.7;
  EXPECT_EQ(select_action(e, pi, 0.0, 1.0), Action::rewrite);
}

TEST(Backup, UpdatesOnlyPath) {
  SearchTree t;
  const int32_t c = t.expand(t.root(), Action::rewrite);
  t.backup({{t.root(), Action::rewrite}}, 0.4);
  EXPECT_EQ(t.node(t.root()).edges[1].N, 1u);
  EXPECT_DOUBLE_EQ(t.node(t.root()).edges[1].Q(), 0.4);
  t.backup({{t.root(), Action::rewrite}, {c, Action::balance}}, 0.2);
  EXPECT_DOUBLE_EQ(t.node(t.root()).edges[1].Q(), 0.3);
  for (uint32_t a = 0; a < kNumActions; ++a) {
    if (a != 1) { EXPECT_EQ(t.node(t.root()).edges[a].N, 0u); }
    if (a != 0) { EXPECT_EQ(t.node(c).edges[a].N, 0u); }
  }
}

TEST(MctsPolicy, Normalization) {
  NodeStats e{};
  e[0].N = 512;
  const ActionDist p = mcts_policy(e);
  EXPECT_EQ(p[0], 1.0);
  for (uint32_t a = 1; a < kNumActions; ++a) EXPECT_EQ(p[a], 0.0);
  for (auto& x : e) x.N = 3;
  for (double v : mcts_policy(e)) EXPECT_DOUBLE_EQ(v, 1.0 / 7.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    for (auto& x : e) x.N = rng() % 1000;
    e[0].N += 1;
    double s = 0.0;
    for (double v : mcts_policy(e)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_THROW(mcts_policy(NodeStats{}), std::invalid_argument);
}

TEST(Evaluator, MemoizationAndBudget) {
  auto ev = make_eval(oracle::small_gates(2), 2);
  const Recipe r = Recipe::parse("b; rw");
  ASSERT_TRUE(ev.evaluate(r));
  ASSERT_TRUE(ev.evaluate(r));
  EXPECT_EQ(ev.runs_used(), 1u);
  ASSERT_TRUE(ev.evaluate(Recipe::parse("rf")));
  EXPECT_FALSE(ev.evaluate(Recipe::parse("rs")));
  EXPECT_TRUE(ev.evaluate(r));
  EXPECT_EQ(ev.trace().size(), 2u);
}

TEST(Rollout, TerminalAndDeterministic) {
  const Aig g = oracle::small_gates(4);
  auto e1 = make_eval(g, 100);
  auto e2 = make_eval(g, 100);
  Mcts m1(e1, small_config(4, 8, 100, 9));
  Mcts m2(e2, small_config(4, 8, 100, 9));
  const Recipe pre = Recipe::parse("b", 4);
  EXPECT_EQ(m1.rollout(pre), m2.rollout(pre));
  EXPECT_EQ(recipes(e1.trace()), recipes(e2.trace()));
  const Recipe full = Recipe::parse("b; rw; rf; b", 4);
  const double direct = e1.evaluate(full)->reward;
  const uint32_t used = e1.runs_used();
  EXPECT_EQ(*m1.rollout(full), direct);
  EXPECT_EQ(e1.runs_used(), used);
}

TEST(Search, BudgetOne) {
  auto ev = make_eval(oracle::small_gates(5), 1);
  const auto r = run_search(ev, small_config(10, 512, 1, 1));
  EXPECT_EQ(r.runs_used, 1u);
  ASSERT_EQ(r.trace.size(), 1u);
  ASSERT_TRUE(r.best_recipe);
  EXPECT_EQ(r.best_recipe->str(), r.trace[0].recipe);
}

TEST(Search, SingleLevelPicksBruteForceBest) {
  for (uint64_t s = 1; s <= 5; ++s) {
    const Aig g = oracle::small_gates(s, 10, 40);
    auto brute = make_eval(g, 7);
    double best = -2.0;
    std::vector<double> reward(kNumActions);
    for (uint32_t a = 0; a < kNumActions; ++a) best = std::max(best, reward[a] = brute.evaluate(Recipe({action_from_id(a)}, 1))->reward);
    auto ev = make_eval(g, 100);
    const auto r = run_search(ev, small_config(1, 256, 100, s));
    ASSERT_EQ(r.committed.size(), 1u);
    EXPECT_EQ(reward[action_id(r.committed[0])], best) << "seed " << s;
  }
}

TEST(Search, BestSoFarMonotoneAndBudgetRespected) {
  for (uint64_t s = 1; s <= 3; ++s) {
    auto ev = make_eval(oracle::small_gates(s + 20, 10, 40), 30);
    const auto r = run_search(ev, small_config(10, 512, 30, s));
    EXPECT_LE(r.runs_used, 30u);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i].best_qor, r.trace[i - 1].best_qor);
    EXPECT_EQ(r.best_qor, r.trace.back().best_qor);
  }
}

TEST(Search, TreeVisitInvariant) {
  // Each expansion is charged to the edge, not to the child, so a child's
  // outgoing visits are one less than its incoming edge count.
  auto ev = make_eval(oracle::small_gates(8), 1000);
  Mcts m(ev, small_config(4, 64, 1000, 3));
  for (int i = 0; i < 200; ++i) {
    ASSERT_TRUE(m.simulate());
    const SearchTree& t = m.tree();
    for (std::size_t n = 0; n < t.size(); ++n) {
      const auto& node = t.node(static_cast<int32_t>(n));
      for (uint32_t a = 0; a < kNumActions; ++a) {
        const int32_t c = node.child[a];
        if (c < 0 || node.edges[a].N == 0 || t.node(c).depth == 4) continue;
        uint64_t sum = 0;
        for (const auto& e : t.node(c).edges) sum += e.N;
        ASSERT_EQ(sum + 1, node.edges[a].N);
      }
    }
  }
}

TEST(Search, TwoLevelFindsExhaustiveOptimum) {
  for (uint64_t s = 1; s <= 5; ++s) {
    const Aig g = oracle::small_gates(s + 40, 10, 40);
    auto brute = make_eval(g, 49);
    double best = 0.0;
    for (uint32_t a = 0; a < kNumActions; ++a) {
      for (uint32_t b = 0; b < kNumActions; ++b) best = std::max(best, brute.evaluate(Recipe({action_from_id(a), action_from_id(b)}, 2))->qor);
    }
    auto ev = make_eval(g, 49);
    const auto r = run_search(ev, small_config(2, 512, 49, s));
    EXPECT_EQ(r.best_qor, best) << "seed " << s;
  }
}

TEST(Search, AlphaOneMatchesPureSearch) {
  const Aig g = oracle::small_gates(13, 10, 40);
  for (uint64_t s = 1; s <= 3; ++s) {
    auto e1 = make_eval(g, 40);
    auto e2 = make_eval(g, 40);
    const auto pure = run_search(e1, small_config(10, 16, 40, s));
    MctsConfig c = small_config(10, 16, 40, s);
    c.alpha = 1.0;
    const auto guided = run_search(e2, c, constant_prior(random_dist(s)));
    EXPECT_EQ(recipes(pure.trace), recipes(guided.trace));
  }
}

TEST(Search, AlphaZeroMatchesDirectPrior) {
  const Aig g = oracle::small_gates(14, 10, 40);
  for (uint64_t s = 1; s <= 3; ++s) {
    auto e1 = make_eval(g, 40);
    auto e2 = make_eval(g, 40);
    MctsConfig c = small_config(10, 16, 40, s);
    const auto weighted = run_search(e1, c, constant_prior(random_dist(s + 7)));
    c.prior_mode = PriorMode::direct;
    const auto direct = run_search(e2, c, constant_prior(random_dist(s + 7)));
    EXPECT_EQ(recipes(weighted.trace), recipes(direct.trace));
  }
}

TEST(Search, UniformPriorEqualsScaledExploration) {
  const Aig g = oracle::small_gates(15, 10, 40);
  for (uint64_t s = 1; s <= 3; ++s) {
    auto e1 = make_eval(g, 40);
    auto e2 = make_eval(g, 40);
    MctsConfig c = small_config(10, 16, 40, s);
    const auto guided = run_search(e1, c, constant_prior(uniform_dist()));
    c.c_uct /= 7.0;
    const auto pure = run_search(e2, c);
    EXPECT_EQ(recipes(guided.trace), recipes(pure.trace));
  }
}

TEST(Config, Validation) {
  MctsConfig c;
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c.alpha = 0.5;
  c.K = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}
