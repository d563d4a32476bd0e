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

#include "abcrl/harness.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace abcrl;
namespace fs = std::filesystem;

namespace {

Model toy_model() {
  std::vector<TrainDesign> ds;
  for (int i = 0; i < 2; ++i) ds.push_back({"t" + std::to_string(i), oracle::small_gates(300 + i, 8, 30)});
  TrainConfig tc;
  tc.epochs = 2;
  tc.K = 4;
  tc.L = 4;
  tc.policy.d = 8;
  TrainResult r = train(ds, tc);
  return {r.params, r.index};
}

ExperimentConfig small_config(Mode m) {
  ExperimentConfig c;
  c.mode = m;
  c.budget = 30;
  c.K = 6;
  c.L = 4;
  c.checkpoint = "in-memory";
  c.index = "in-memory";
  return c;
}

}  // namespace

TEST(Config, ParsesKeyValueText) {
  ExperimentConfig c;
  load_config_text(c, "# comment\nmode = abc-rl\nbudget=42  # trailing\n\nseed=7\nalpha=0.25\ndelta_th=0.01\ntemperature=0.1\nrecipe=b; rw\n");
  EXPECT_EQ(c.mode, Mode::abc_rl);
  EXPECT_EQ(c.budget, 42u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.alpha, 0.25);
  EXPECT_EQ(c.alpha_config, (AlphaConfig{0.01, 0.1}));
  EXPECT_EQ(c.recipe, "b; rw");
  EXPECT_THROW(load_config_text(c, "bogus=1"), ConfigError);
  EXPECT_THROW(load_config_text(c, "budget=ten"), ConfigError);
  EXPECT_THROW(load_config_text(c, "budget"), ConfigError);
  EXPECT_THROW(load_config_text(c, "mode=annealing"), ConfigError);
  EXPECT_THROW(load_config_file(c, "/nonexistent/abcrl.cfg"), ConfigError);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.mode = Mode::mcts_l;
  EXPECT_THROW(c.validate(), ConfigError);
  c.checkpoint = "x";
  EXPECT_NO_THROW(c.validate());
  c.mode = Mode::abc_rl;
  EXPECT_THROW(c.validate(), ConfigError);
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c.alpha = 0.5;
  EXPECT_NO_THROW(c.validate());
  for (std::size_t i = 0; i < kModeNames.size(); ++i) EXPECT_EQ(mode_name(parse_mode(kModeNames[i])), kModeNames[i]);
}

TEST(Manifest, PathsAndNames) {
  const auto m = parse_manifest("a.aig\n# skip\n  sub/b.aig name=bee \n/abs/c.aig\n", "/base");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0].path, "/base/a.aig");
  EXPECT_EQ(m[0].name, "a");
  EXPECT_EQ(m[1].path, "/base/sub/b.aig");
  EXPECT_EQ(m[1].name, "bee");
  EXPECT_EQ(m[2].path, "/abs/c.aig");
  EXPECT_THROW(parse_manifest("a.aig b.aig"), ConfigError);
  EXPECT_THROW(parse_manifest("name=x"), ConfigError);
  EXPECT_THROW(load_designs({{"/nonexistent/x.aig", "x"}}), InputError);
}

TEST(Run, FixedResyn2IsZeroReduction) {
  const Aig g = oracle::small_gates(5, 8, 40);
  const RunRecord r = run_experiment(small_config(Mode::fixed_recipe), "g", g);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.reduction_pct, 0.0);
  EXPECT_EQ(r.best_adp, r.baseline_adp);
}

TEST(Run, RandomRespectsBudget) {
  const Aig g = oracle::small_gates(6, 8, 40);
  const RunRecord r = run_experiment(small_config(Mode::random), "g", g);
  EXPECT_LE(r.trace.size(), 30u);
  EXPECT_GT(r.trace.size(), 0u);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i].best_qor, r.trace[i - 1].best_qor);
}

TEST(Run, LearnedModesNeedModel) {
  const Aig g = oracle::small_gates(7);
  EXPECT_THROW(run_experiment(small_config(Mode::abc_rl), "g", g), ConfigError);
}

TEST(Run, AbcRlAtAlphaOneMatchesMcts) {
  const Model model = toy_model();
  const Aig g = oracle::small_gates(8, 8, 40);
  ExperimentConfig a = small_config(Mode::abc_rl);
  a.alpha = 1.0;
  const RunRecord ra = run_experiment(a, "g", g, &model);
  const RunRecord rm = run_experiment(small_config(Mode::mcts), "g", g);
  ASSERT_EQ(ra.trace.size(), rm.trace.size());
  for (std::size_t i = 0; i < ra.trace.size(); ++i) EXPECT_EQ(ra.trace[i].recipe, rm.trace[i].recipe);

  const RunRecord rr = run_experiment(small_config(Mode::abc_rl), "t1", oracle::small_gates(301, 8, 30), &model);
  EXPECT_EQ(rr.neighbor, "t1");
  EXPECT_EQ(rr.delta, 0.0);
  EXPECT_NEAR(*rr.alpha, compute_alpha(0.0, AlphaConfig{}), 1e-15);
}

TEST(Compare, GeoMeanAndSpeedup) {
  EXPECT_NEAR(geo_mean_reduction({10.0, 40.0}), 20.0, 1e-12);
  EXPECT_NEAR(geo_mean_reduction({0.0, 10.0}), 1.0, 1e-12);
  RunRecord a, b;
  a.trace = {{1, "x", 0, 0, 0.1, 0.1}, {2, "y", 0, 0, 0.3, 0.3}, {3, "z", 0, 0, 0.2, 0.3}};
  b = a;
  CompareRow row = compare_design("d", {&a, &b}, 0);
  EXPECT_EQ(row.speedup[1], 1.0);
  b.trace = {{1, "y", 0, 0, 0.3, 0.3}};
  row = compare_design("d", {&a, &b}, 0);
  EXPECT_EQ(row.speedup[1], 2.0);
  EXPECT_EQ(b.crossover, 1u);
  b.trace = {{1, "x", 0, 0, 0.1, 0.1}};
  row = compare_design("d", {&a, &b}, 0);
  EXPECT_FALSE(row.speedup[1].has_value());
}

TEST(Compare, TableShapeAndParity) {
  std::vector<TrainDesign> ds = {{"p", oracle::small_gates(9, 8, 30)}, {"q", oracle::small_gates(10, 8, 30)}};
  std::vector<ExperimentConfig> cfgs = {small_config(Mode::mcts), small_config(Mode::random), small_config(Mode::fixed_recipe)};
  const CompareTable t = compare(cfgs, ds, nullptr);
  EXPECT_EQ(t.rows.size(), ds.size() + 1);
  EXPECT_EQ(t.rows.back().design, "geo-mean");
  EXPECT_EQ(t.records.size(), 6u);
  EXPECT_EQ(t.rows[0].speedup[0], 1.0);
  const auto j = to_json(t);
  EXPECT_EQ(j["rows"].size(), 3u);
  EXPECT_FALSE(compare_csv(t).empty());
  cfgs[1].budget = 31;
  EXPECT_THROW(compare(cfgs, ds, nullptr), ConfigError);
  cfgs[1].budget = 30;
  EXPECT_THROW(compare(cfgs, ds, nullptr, "abc-rl"), ConfigError);
}

TEST(Tune, TableCoversGrid) {
  const Model model = toy_model();
  std::vector<TrainDesign> val = {{"v0", oracle::small_gates(400, 8, 30)}, {"v1", oracle::small_gates(401, 8, 30)}};
  const std::vector<AlphaConfig> grid = {{0.001, 0.001}, {0.01, 1.0}, {0.03, 100.0}};
  ExperimentConfig base = small_config(Mode::abc_rl);
  base.tune_budget = 10;
  const TuneResult r = tune_hyperparams(val, model, grid, base);
  EXPECT_EQ(r.table.size(), val.size() * grid.size());
  EXPECT_EQ(r.scores.size(), grid.size());
  EXPECT_NE(std::find(grid.begin(), grid.end(), r.best), grid.end());
  EXPECT_TRUE(to_json(r).contains("chosen"));
}

TEST(Output, AtomicWriteAndCsv) {
  const fs::path dir = fs::temp_directory_path() / "abcrl_test_out";
  fs::create_directories(dir);
  write_text_file(dir / "x.txt", "hello\n");
  std::ifstream in(dir / "x.txt");
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "hello");
  EXPECT_FALSE(fs::exists(dir / "x.txt.tmp"));
  fs::remove_all(dir);
  const std::string csv = trace_csv({{1, "b; rw", 10, 3, 1.0 / 30, 1.0 / 30}});
  EXPECT_EQ(csv, "run,recipe,nodes,levels,qor,best_qor\n1,\"b; rw\",10,3,0.033333333333333333,0.033333333333333333\n");
}
