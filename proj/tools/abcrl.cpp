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

// abcrl command-line front end.
//
// Exit codes: 0 success, 1 check-equiv found a difference, 2 configuration
// error, 3 input error, 4 numeric failure.

#include "abcrl/aiger.hpp"
#include "abcrl/harness.hpp"
#include "abcrl/rewrite_library.hpp"
#include "abcrl/simulation.hpp"
#include "abcrl/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace abcrl;

namespace {

constexpr const char* kConfigEnv = "ABCRL_CONFIG";

const std::vector<std::string> kConfigKeys = {"mode",     "budget",      "seed",   "L",      "K",           "c_uct",     "alpha",
                                              "checkpoint", "index",     "delta_th", "temperature", "out_dir", "ft_lr", "recipe",
                                              "tune_budget", "reference", "epochs", "train_K", "lr",          "d"};

struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::string alpha_file;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, std::string("key=value config file (default: $") + kConfigEnv + ")");
    for (const auto& k : kConfigKeys) {
      std::string flag = "--" + k;
      for (auto& ch : flag) {
        if (ch == '_') ch = '-';
      }
      app->add_option_function<std::string>(flag, [this, k](const std::string& v) { values[k] = v; }, "override '" + k + "'");
    }
    app->add_option("--alpha-config", alpha_file, "JSON written by `tune` supplying delta_th and temperature");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv(kConfigEnv); env && *env) path = env;
    }
    if (!path.empty()) load_config_file(c, path);
    if (!alpha_file.empty()) {
      std::ifstream in(alpha_file);
      if (!in) throw ConfigError("cannot open " + alpha_file);
      nlohmann::json j;
      try {
        in >> j;
        c.alpha_config.delta_th = j.at("delta_th").get<double>();
        c.alpha_config.temperature = j.at("temperature").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(alpha_file + ": " + e.what());
      }
    }
    for (const auto& [k, v] : values) set_config_value(c, k, v);
    return c;
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

fs::path out_dir_or_cwd(const ExperimentConfig& c) { return c.out_dir.empty() ? fs::current_path() : fs::path(c.out_dir); }

int cmd_optimize(const ConfigOptions& opts, const std::string& aig_path) {
  const ExperimentConfig c = opts.resolve();
  c.validate();
  const Aig g = read_aiger_file(aig_path);
  std::optional<Model> model;
  if (needs_checkpoint(c.mode)) model = load_model(c);
  const std::string name = fs::path(aig_path).stem().string();
  const RunRecord rec = run_experiment(c, name, g, model ? &*model : nullptr);
  const fs::path dir = out_dir_or_cwd(c);
  const std::string stem = name + "." + std::string(mode_name(c.mode)) + ".s" + std::to_string(c.seed);
  write_json(dir / (stem + ".json"), to_json(rec));
  write_text_file(dir / (stem + ".trace.csv"), trace_csv(rec.trace));
  nlohmann::json summary = to_json(rec);
  summary.erase("trace");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_train(const ConfigOptions& opts, const std::string& manifest) {
  const ExperimentConfig c = opts.resolve();
  const auto designs = load_designs(read_manifest(manifest));
  TrainConfig tc;
  tc.epochs = c.epochs;
  tc.K = c.train_K;
  tc.lr = c.lr;
  tc.seed = c.seed;
  tc.L = c.L;
  tc.c_uct = c.c_uct;
  tc.policy.d = c.d;
  const TrainResult res = train(designs, tc);
  const fs::path dir = out_dir_or_cwd(c);
  const fs::path ckpt = c.checkpoint.empty() ? dir / "policy.ckpt" : fs::path(c.checkpoint);
  const fs::path index = c.index.empty() ? dir / "index.bin" : fs::path(c.index);
  save_policy(ckpt, res.params, {c.epochs, c.seed, static_cast<uint32_t>(designs.size())});
  res.index.save(index);
  write_text_file(dir / "train_log.csv", train_log_csv(res.log));
  nlohmann::json j = {{"checkpoint", ckpt.string()}, {"index", index.string()},  {"designs", designs.size()},
                      {"epochs", c.epochs},         {"reward_min", res.reward_min}, {"reward_max", res.reward_max}};
  if (!res.log.empty()) j["final_loss"] = res.log.back().mean_loss;
  std::cout << j.dump(2) << "\n";
  return 0;
}

std::vector<AlphaConfig> parse_grid(const std::vector<double>& ths, const std::vector<double>& ts) {
  if (ths.empty() && ts.empty()) return default_alpha_grid();
  if (ths.empty() || ts.empty()) throw ConfigError("tune: give both --grid-delta-th and --grid-temperature");
  std::vector<AlphaConfig> grid;
  for (double th : ths) {
    for (double t : ts) {
      AlphaConfig a{th, t};
      a.validate();
      grid.push_back(a);
    }
  }
  return grid;
}

int cmd_tune(const ConfigOptions& opts, const std::string& manifest, const std::vector<double>& ths, const std::vector<double>& ts) {
  ExperimentConfig c = opts.resolve();
  if (c.checkpoint.empty() || c.index.empty()) throw ConfigError("tune needs --checkpoint and --index");
  const auto grid = parse_grid(ths, ts);
  const auto designs = load_designs(read_manifest(manifest));
  const Model model = load_model(c);
  const TuneResult r = tune_hyperparams(designs, model, grid, c);
  const nlohmann::json j = to_json(r);
  write_json(out_dir_or_cwd(c) / "alpha_config.json", j);
  std::cout << nlohmann::json{{"delta_th", r.best.delta_th}, {"temperature", r.best.temperature}, {"chosen", j["chosen"]}}.dump(2) << "\n";
  return 0;
}

int cmd_compare(const ConfigOptions& opts, const std::string& manifest, const std::vector<std::string>& modes,
                const std::vector<std::string>& run_configs) {
  const ExperimentConfig base = opts.resolve();
  std::vector<ExperimentConfig> configs;
  for (const auto& path : run_configs) {
    ExperimentConfig c = base;
    load_config_file(c, path);
    configs.push_back(c);
  }
  for (const auto& m : modes) {
    ExperimentConfig c = base;
    c.mode = parse_mode(m);
    configs.push_back(c);
  }
  if (configs.empty()) throw ConfigError("compare: give --modes or --run-config");
  check_budget_parity(configs);
  bool learned = false;
  for (const auto& c : configs) {
    c.validate();
    learned = learned || needs_checkpoint(c.mode);
  }
  const auto designs = load_designs(read_manifest(manifest));
  std::optional<Model> model;
  if (learned) model = load_model(configs.front());
  const CompareTable t = compare(configs, designs, model ? &*model : nullptr, base.reference);
  const fs::path dir = out_dir_or_cwd(base);
  write_json(dir / "compare.json", to_json(t));
  write_text_file(dir / "compare.csv", compare_csv(t));
  std::cout << compare_csv(t);
  return 0;
}

int cmd_retrieve(const ConfigOptions& opts, const std::string& aig_path) {
  const ExperimentConfig c = opts.resolve();
  if (c.checkpoint.empty() || c.index.empty()) throw ConfigError("retrieve needs --checkpoint and --index");
  const Model m = load_model(c);
  const Aig g = read_aiger_file(aig_path);
  const Neighbor nb = m.index->nearest(gcn_embed(m.params, make_graph_input(g)));
  const nlohmann::json j = {{"design", fs::path(aig_path).stem().string()},
                            {"neighbor", nb.name},
                            {"delta", nb.delta},
                            {"alpha", compute_alpha(nb.delta, c.alpha_config)},
                            {"delta_th", c.alpha_config.delta_th},
                            {"temperature", c.alpha_config.temperature}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_stats(const std::vector<std::string>& paths, bool json) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : paths) {
    const AigStats s = stats(read_aiger_file(p));
    const std::string name = fs::path(p).stem().string();
    if (json) {
      arr.push_back({{"design", name}, {"pis", s.num_pis}, {"pos", s.num_pos}, {"nodes", s.num_nodes}, {"levels", s.num_levels}});
    } else {
      std::cout << name << " " << s.num_pis << " " << s.num_pos << " " << s.num_nodes << " " << s.num_levels << "\n";
    }
  }
  if (json) std::cout << arr.dump(2) << "\n";
  return 0;
}

int cmd_check_equiv(const std::string& a, const std::string& b, uint64_t seed) {
  const Aig g1 = read_aiger_file(a);
  const Aig g2 = read_aiger_file(b);
  if (g1.num_pis() != g2.num_pis() || g1.num_pos() != g2.num_pos()) throw InputError("interfaces differ");
  const auto r = check_equivalence_auto(g1, g2, 16, seed);
  nlohmann::json j = {{"equivalent", r.equivalent}, {"exhaustive", g1.num_pis() <= 16}};
  if (!r.equivalent) {
    std::string cex;
    for (bool v : r.counterexample) cex += v ? '1' : '0';
    j["output"] = r.output;
    j["counterexample"] = cex;
  }
  std::cout << j.dump(2) << "\n";
  return r.equivalent ? 0 : 1;
}

int cmd_build_library(const std::string& out, uint32_t max_nodes) {
  if (max_nodes < 1 || max_nodes > 7) throw ConfigError("--max-nodes must lie in [1, 7]");
  const RewriteLibrary lib = build_rewrite_library(max_nodes);
  lib.save(out);
  std::cout << nlohmann::json{{"path", out}, {"coverage", lib.coverage()}, {"classes", 222}}.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"abcrl: logic-synthesis recipe search"};
  app.require_subcommand(1);
  ConfigOptions opts;

  std::string aig_path, manifest, a_path, b_path, lib_out;
  std::vector<std::string> paths, modes, run_configs;
  std::vector<double> grid_th, grid_t;
  bool stats_json = false;
  uint64_t eq_seed = 1;
  uint32_t max_nodes = 7;

  auto* optimize = app.add_subcommand("optimize", "search a recipe for one design");
  opts.attach(optimize);
  optimize->add_option("aig", aig_path, "AIGER file")->required();

  auto* train_cmd = app.add_subcommand("train", "pre-train the policy on a manifest of designs");
  opts.attach(train_cmd);
  train_cmd->add_option("manifest", manifest, "design manifest")->required();

  auto* tune = app.add_subcommand("tune", "grid-search delta_th and T on validation designs");
  opts.attach(tune);
  tune->add_option("manifest", manifest, "validation manifest")->required();
  tune->add_option("--grid-delta-th", grid_th, "threshold values");
  tune->add_option("--grid-temperature", grid_t, "temperature values");

  auto* cmp = app.add_subcommand("compare", "run several strategies on a manifest under one budget");
  opts.attach(cmp);
  cmp->add_option("manifest", manifest, "test manifest")->required();
  cmp->add_option("--modes", modes, "modes to compare")->delimiter(',');
  cmp->add_option("--run-config", run_configs, "per-mode config file (repeatable)");

  auto* retrieve = app.add_subcommand("retrieve", "nearest training design, delta and alpha");
  opts.attach(retrieve);
  retrieve->add_option("aig", aig_path, "AIGER file")->required();

  auto* st = app.add_subcommand("stats", "PIs POs nodes levels");
  st->add_option("aig", paths, "AIGER files")->required();
  st->add_flag("--json", stats_json, "JSON output");

  auto* eq = app.add_subcommand("check-equiv", "combinational equivalence by simulation");
  eq->add_option("a", a_path)->required();
  eq->add_option("b", b_path)->required();
  eq->add_option("--seed", eq_seed, "random-simulation seed");

  auto* lib = app.add_subcommand("build-library", "enumerate the 4-input rewrite library");
  lib->add_option("--out", lib_out, "output file")->required();
  lib->add_option("--max-nodes", max_nodes, "largest structure size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*optimize) return cmd_optimize(opts, aig_path);
    if (*train_cmd) return cmd_train(opts, manifest);
    if (*tune) return cmd_tune(opts, manifest, grid_th, grid_t);
    if (*cmp) return cmd_compare(opts, manifest, modes, run_configs);
    if (*retrieve) return cmd_retrieve(opts, aig_path);
    if (*st) return cmd_stats(paths, stats_json);
    if (*eq) return cmd_check_equiv(a_path, b_path, eq_seed);
    if (*lib) return cmd_build_library(lib_out, max_nodes);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
