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
  \file harness.hpp
  \brief Experiment configuration, search strategies, comparison tables and result files.
*/

#pragma once

#include "aiger.hpp"
#include "errors.hpp"
#include "mcts.hpp"
#include "policy.hpp"
#include "retrieval.hpp"
#include "synthesis.hpp"
#include "trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace abcrl {

enum class Mode { mcts, mcts_l, mcts_l_ft, abc_rl, random, fixed_recipe };

inline constexpr std::array<std::string_view, 6> kModeNames = {"mcts", "mcts-l", "mcts-l-ft", "abc-rl", "random", "fixed-recipe"};

inline std::string_view mode_name(Mode m) { return kModeNames[static_cast<std::size_t>(m)]; }

inline Mode parse_mode(std::string_view s) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i) {
    if (kModeNames[i] == s) return static_cast<Mode>(i);
  }
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

inline bool needs_checkpoint(Mode m) { return m == Mode::mcts_l || m == Mode::mcts_l_ft || m == Mode::abc_rl; }

struct ExperimentConfig {
  Mode mode = Mode::mcts;
  uint32_t budget = 100;
  uint64_t seed = 1;
  uint32_t L = kDefaultRecipeLength;
  uint32_t K = 512;
  double c_uct = std::numbers::sqrt2;
  std::optional<double> alpha;  // override
  std::string checkpoint;
  std::string index;
  AlphaConfig alpha_config;
  std::string out_dir;
  double ft_lr = 0.001;
  std::string recipe = "b; rw; rf; b; rw; rw-z; b; rf-z; rw-z; b";
  uint32_t tune_budget = 20;
  std::string reference = "mcts";
  // training
  uint32_t epochs = 50;
  uint32_t train_K = 512;
  double lr = 0.01;
  uint32_t d = 64;

  void validate() const {
    if (budget < 1) throw ConfigError("budget must be at least 1");
    if (L < 1) throw ConfigError("L must be at least 1");
    if (K < 1 || train_K < 1) throw ConfigError("K must be at least 1");
    if (alpha && !(*alpha >= 0.0 && *alpha <= 1.0)) throw ConfigError("alpha override must lie in [0, 1]");
    alpha_config.validate();
    if (needs_checkpoint(mode) && checkpoint.empty()) throw ConfigError(std::string(mode_name(mode)) + " mode needs a checkpoint");
    if (mode == Mode::abc_rl && index.empty() && !alpha) throw ConfigError("abc-rl mode needs an embedding index");
    if (d < 1) throw ConfigError("d must be at least 1");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  if (!is || !is.eof()) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return out;
}

}  // namespace detail

/// Applies one `key=value` setting.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
  using detail::parse_number;
  if (key == "mode") c.mode = parse_mode(v);
  else if (key == "budget") c.budget = parse_number<uint32_t>(key, v);
  else if (key == "seed") c.seed = parse_number<uint64_t>(key, v);
  else if (key == "L") c.L = parse_number<uint32_t>(key, v);
  else if (key == "K") c.K = parse_number<uint32_t>(key, v);
  else if (key == "c_uct") c.c_uct = parse_number<double>(key, v);
  else if (key == "alpha") c.alpha = parse_number<double>(key, v);
  else if (key == "checkpoint") c.checkpoint = v;
  else if (key == "index") c.index = v;
  else if (key == "delta_th") c.alpha_config.delta_th = parse_number<double>(key, v);
  else if (key == "temperature") c.alpha_config.temperature = parse_number<double>(key, v);
  else if (key == "out_dir") c.out_dir = v;
  else if (key == "ft_lr") c.ft_lr = parse_number<double>(key, v);
  else if (key == "recipe") c.recipe = v;
  else if (key == "tune_budget") c.tune_budget = parse_number<uint32_t>(key, v);
  else if (key == "reference") c.reference = v;
  else if (key == "epochs") c.epochs = parse_number<uint32_t>(key, v);
  else if (key == "train_K") c.train_K = parse_number<uint32_t>(key, v);
  else if (key == "lr") c.lr = parse_number<double>(key, v);
  else if (key == "d") c.d = parse_number<uint32_t>(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

/// `key = value` lines; `#` starts a comment.
inline void load_config_text(ExperimentConfig& c, const std::string& text, const std::string& origin = "config") {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    set_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(ExperimentConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_config_text(c, ss.str(), path.string());
}

struct ManifestEntry {
  std::string path;
  std::string name;
};

/// One AIGER path per line, optionally followed by `name=<label>`.
inline std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::filesystem::path& base = {}) {
  std::vector<ManifestEntry> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string tok;
    ManifestEntry e;
    while (ls >> tok) {
      if (tok.rfind("name=", 0) == 0) e.name = tok.substr(5);
      else if (e.path.empty()) e.path = tok;
      else throw ConfigError("manifest: unexpected token '" + tok + "'");
    }
    if (e.path.empty()) {
      if (!e.name.empty()) throw ConfigError("manifest: name without path");
      continue;
    }
    std::filesystem::path p(e.path);
    if (p.is_relative() && !base.empty()) e.path = (base / p).string();
    if (e.name.empty()) e.name = p.stem().string();
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto m = parse_manifest(ss.str(), path.parent_path());
  if (m.empty()) throw ConfigError("manifest " + path.string() + " lists no designs");
  return m;
}

/// Reads every design; unreadable ones are reported together by name.
inline std::vector<TrainDesign> load_designs(const std::vector<ManifestEntry>& manifest) {
  std::vector<TrainDesign> out;
  std::string failed;
  for (const auto& e : manifest) {
    try {
      out.push_back({e.name, read_aiger_file(e.path)});
    } catch (const std::exception& ex) {
      failed += "\n  " + e.name + ": " + ex.what();
    }
  }
  if (!failed.empty()) throw InputError("unreadable designs:" + failed);
  return out;
}

struct Model {
  PolicyParams params;
  std::optional<EmbeddingIndex> index;
};

inline Model load_model(const ExperimentConfig& c) {
  Model m;
  m.params = load_policy(c.checkpoint);
  if (!c.index.empty()) {
    m.index = EmbeddingIndex::load(c.index);
    if (m.index->dim() != 2 * m.params.cfg.d) throw InputError("index dimension does not match the checkpoint");
  }
  return m;
}

struct RunRecord {
  std::string design;
  Mode mode = Mode::mcts;
  uint64_t seed = 0;
  uint32_t budget = 0;
  std::string best_recipe;
  double baseline_adp = 0.0;
  double best_adp = 0.0;
  double reduction_pct = 0.0;
  std::vector<TraceRow> trace;
  std::optional<uint32_t> crossover;  // vs. the reference mode's best QoR
  std::optional<double> alpha;
  std::optional<double> delta;
  std::optional<std::string> neighbor;
};

/// First run index at which the best-so-far QoR reaches `target`.
inline std::optional<uint32_t> crossover_index(const std::vector<TraceRow>& trace, double target) {
  for (const auto& r : trace) {
    if (r.best_qor >= target) return r.run_index;
  }
  return std::nullopt;
}

inline MctsConfig mcts_config(const ExperimentConfig& c, double alpha = 0.0) {
  MctsConfig m;
  m.K = c.K;
  m.L = c.L;
  m.c_uct = c.c_uct;
  m.alpha = alpha;
  m.budget = c.budget;
  m.seed = c.seed;
  return m;
}

inline void fill_outcome(RunRecord& rec, const SynthesisEvaluator& eval) {
  rec.trace = eval.trace();
  rec.baseline_adp = eval.baseline_adp();
  if (eval.best_recipe()) rec.best_recipe = eval.best_recipe()->str();
  for (const auto& row : rec.trace) {
    if (row.qor == eval.best_qor()) {
      rec.best_adp = search_adp({0, 0, row.nodes, row.levels});
      break;
    }
  }
  rec.reduction_pct = 100.0 * (1.0 - rec.best_adp / rec.baseline_adp);
}

/// Runs one strategy on one design.
inline RunRecord run_experiment(const ExperimentConfig& c, const std::string& name, const Aig& g, const Model* model = nullptr,
                                std::optional<double> baseline = std::nullopt, const TransformParams& tp = {}) {
  c.validate();
  if (needs_checkpoint(c.mode) && !model) throw ConfigError(std::string(mode_name(c.mode)) + " mode needs a loaded checkpoint");
  RunRecord rec;
  rec.design = name;
  rec.mode = c.mode;
  rec.seed = c.seed;
  rec.budget = c.budget;
  SynthesisEvaluator eval(g, baseline ? *baseline : resyn2_adp(g, tp), c.budget, tp);
  switch (c.mode) {
    case Mode::mcts:
      run_search(eval, mcts_config(c));
      break;
    case Mode::mcts_l: {
      const double a = c.alpha.value_or(0.0);
      rec.alpha = a;
      run_search(eval, mcts_config(c, a), make_prior(model->params, g));
      break;
    }
    case Mode::mcts_l_ft:
      fine_tune_online(model->params, eval, mcts_config(c, c.alpha.value_or(0.0)), c.ft_lr);
      rec.alpha = c.alpha.value_or(0.0);
      break;
    case Mode::abc_rl: {
      if (model->index) {
        const Neighbor nb = model->index->nearest(gcn_embed(model->params, make_graph_input(g)));
        rec.delta = nb.delta;
        rec.neighbor = nb.name;
      }
      if (!c.alpha && !rec.delta) throw ConfigError("abc-rl mode needs an embedding index");
      const double a = c.alpha ? *c.alpha : compute_alpha(*rec.delta, c.alpha_config);
      rec.alpha = a;
      run_search(eval, mcts_config(c, a), make_prior(model->params, g));
      break;
    }
    case Mode::random: {
      std::mt19937_64 rng(c.seed);
      const uint64_t max_attempts = uint64_t{c.budget} * 1000;
      for (uint64_t i = 0; i < max_attempts && !eval.exhausted(); ++i) {
        Recipe r(c.L);
        while (!r.full()) r.push(action_from_id(static_cast<uint32_t>(rng() % kNumActions)));
        eval.evaluate(r);
      }
      break;
    }
    case Mode::fixed_recipe:
      eval.evaluate(Recipe::parse(c.recipe, std::max<uint32_t>(c.L, 64)));
      break;
  }
  fill_outcome(rec, eval);
  return rec;
}

/// Geometric mean of reduction percentages; values below 0.1% count as 0.1%.
inline double geo_mean_reduction(const std::vector<double>& pct, double floor = 0.1) {
  if (pct.empty()) return 0.0;
  double s = 0.0;
  for (double p : pct) s += std::log(std::max(p, floor));
  return std::exp(s / static_cast<double>(pct.size()));
}

struct CompareRow {
  std::string design;
  std::vector<double> reduction_pct;               // per mode
  std::vector<std::optional<double>> speedup;      // per mode, vs. reference
};

struct CompareTable {
  std::vector<std::string> modes;
  std::string reference;
  uint32_t budget = 0;
  std::vector<CompareRow> rows;  // designs, then the geo-mean row
  std::vector<RunRecord> records;
};

inline void check_budget_parity(const std::vector<ExperimentConfig>& configs) {
  for (const auto& c : configs) {
    if (c.budget != configs.front().budget) throw ConfigError("compare: all modes must share one budget");
  }
}

/// Iso-QoR speed-up of each record against the reference record's best QoR.
inline CompareRow compare_design(const std::string& design, std::vector<RunRecord*> recs, std::size_t ref) {
  CompareRow row;
  row.design = design;
  double target = 0.0;
  for (const auto& t : recs[ref]->trace) target = std::max(target, t.best_qor);
  const auto ref_x = crossover_index(recs[ref]->trace, target);
  for (auto* r : recs) {
    row.reduction_pct.push_back(r->reduction_pct);
    r->crossover = crossover_index(r->trace, target);
    if (ref_x && r->crossover) row.speedup.push_back(static_cast<double>(*ref_x) / *r->crossover);
    else row.speedup.push_back(std::nullopt);
  }
  return row;
}

inline CompareTable compare(const std::vector<ExperimentConfig>& configs, const std::vector<TrainDesign>& designs, const Model* model,
                            const std::string& reference = "mcts", const TransformParams& tp = {}) {
  if (configs.empty()) throw ConfigError("compare: no modes");
  check_budget_parity(configs);
  CompareTable t;
  t.reference = reference;
  t.budget = configs.front().budget;
  std::size_t ref = configs.size();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    t.modes.emplace_back(mode_name(configs[i].mode));
    if (t.modes.back() == reference && ref == configs.size()) ref = i;
  }
  if (ref == configs.size()) throw ConfigError("compare: reference mode " + reference + " is not among the compared modes");
  for (const auto& d : designs) {
    const double base = resyn2_adp(d.aig, tp);
    const std::size_t first = t.records.size();
    for (const auto& c : configs) t.records.push_back(run_experiment(c, d.name, d.aig, model, base, tp));
    std::vector<RunRecord*> recs;
    for (std::size_t i = first; i < t.records.size(); ++i) recs.push_back(&t.records[i]);
    t.rows.push_back(compare_design(d.name, recs, ref));
  }
  CompareRow geo;
  geo.design = "geo-mean";
  const std::size_t nd = t.rows.size();
  for (std::size_t m = 0; m < configs.size(); ++m) {
    std::vector<double> red;
    double log_s = 0.0;
    std::size_t n_s = 0;
    for (std::size_t r = 0; r < nd; ++r) {
      red.push_back(t.rows[r].reduction_pct[m]);
      if (t.rows[r].speedup[m]) {
        log_s += std::log(*t.rows[r].speedup[m]);
        ++n_s;
      }
    }
    geo.reduction_pct.push_back(geo_mean_reduction(red));
    geo.speedup.push_back(n_s ? std::optional<double>(std::exp(log_s / static_cast<double>(n_s))) : std::nullopt);
  }
  t.rows.push_back(std::move(geo));
  return t;
}

/// Grid search over (delta_th, T): ABC-RL against MCTS and MCTS+L on each
/// validation design with a reduced budget.
inline TuneResult tune_hyperparams(const std::vector<TrainDesign>& designs, const Model& model, const std::vector<AlphaConfig>& grid,
                                   ExperimentConfig base, const TransformParams& tp = {}) {
  if (grid.empty()) throw ConfigError("tune: empty grid");
  if (designs.empty()) throw ConfigError("tune: no validation designs");
  if (!model.index) throw ConfigError("tune: an embedding index is required");
  base.budget = base.tune_budget;
  base.alpha.reset();
  std::vector<TuneCell> table;
  for (const auto& d : designs) {
    const double baseline = resyn2_adp(d.aig, tp);
    ExperimentConfig c = base;
    c.mode = Mode::mcts;
    const RunRecord m = run_experiment(c, d.name, d.aig, &model, baseline, tp);
    c.mode = Mode::mcts_l;
    const RunRecord ml = run_experiment(c, d.name, d.aig, &model, baseline, tp);
    const double delta = model.index->nearest(gcn_embed(model.params, make_graph_input(d.aig))).delta;
    std::map<double, double> by_alpha;
    for (const auto& g : grid) {
      const double a = compute_alpha(delta, g);
      if (!by_alpha.count(a)) {
        c.mode = Mode::abc_rl;
        c.alpha = a;
        by_alpha[a] = 1.0 / run_experiment(c, d.name, d.aig, &model, baseline, tp).best_adp;
      }
      TuneCell cell;
      cell.design = d.name;
      cell.config = g;
      cell.delta = delta;
      cell.alpha = a;
      cell.abc_rl_qor = by_alpha[a];
      cell.mcts_qor = 1.0 / m.best_adp;
      cell.mcts_l_qor = 1.0 / ml.best_adp;
      table.push_back(cell);
    }
  }
  return score_tuning(grid, std::move(table));
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json trace_json(const std::vector<TraceRow>& trace) {
  auto arr = nlohmann::json::array();
  for (const auto& r : trace) {
    arr.push_back({{"run", r.run_index}, {"recipe", r.recipe}, {"nodes", r.nodes}, {"levels", r.levels}, {"qor", r.qor}, {"best_qor", r.best_qor}});
  }
  return arr;
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j = {{"design", r.design},
                      {"mode", std::string(mode_name(r.mode))},
                      {"seed", r.seed},
                      {"budget", r.budget},
                      {"best_recipe", r.best_recipe},
                      {"baseline_adp", r.baseline_adp},
                      {"best_adp", r.best_adp},
                      {"reduction_pct", r.reduction_pct},
                      {"runs", r.trace.size()},
                      {"trace", trace_json(r.trace)}};
  j["crossover"] = r.crossover ? nlohmann::json(*r.crossover) : nlohmann::json(nullptr);
  if (r.alpha) j["alpha"] = *r.alpha;
  if (r.delta) j["delta"] = *r.delta;
  if (r.neighbor) j["neighbor"] = *r.neighbor;
  return j;
}

inline std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "run,recipe,nodes,levels,qor,best_qor\n";
  for (const auto& r : trace) os << r.run_index << ",\"" << r.recipe << "\"," << r.nodes << ',' << r.levels << ',' << r.qor << ',' << r.best_qor << '\n';
  return os.str();
}

inline nlohmann::json to_json(const CompareTable& t) {
  nlohmann::json j = {{"modes", t.modes}, {"reference", t.reference}, {"budget", t.budget}, {"geo_mean_floor_pct", 0.1}};
  auto rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = {{"design", r.design}};
    for (std::size_t m = 0; m < t.modes.size(); ++m) {
      row["reduction_pct"][t.modes[m]] = r.reduction_pct[m];
      row["speedup"][t.modes[m]] = r.speedup[m] ? nlohmann::json(*r.speedup[m]) : nlohmann::json(nullptr);
    }
    rows.push_back(row);
  }
  j["rows"] = rows;
  auto recs = nlohmann::json::array();
  for (const auto& r : t.records) recs.push_back(to_json(r));
  j["records"] = recs;
  return j;
}

inline std::string compare_csv(const CompareTable& t) {
  std::ostringstream os;
  os.precision(10);
  os << "design";
  for (const auto& m : t.modes) os << ',' << m << "_reduction_pct";
  for (const auto& m : t.modes) os << ',' << m << "_speedup";
  os << '\n';
  for (const auto& r : t.rows) {
    os << r.design;
    for (double v : r.reduction_pct) os << ',' << v;
    for (const auto& s : r.speedup) {
      os << ',';
      if (s) os << *s;
    }
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json to_json(const TuneResult& r) {
  nlohmann::json j = {{"delta_th", r.best.delta_th}, {"temperature", r.best.temperature}};
  auto table = nlohmann::json::array();
  for (const auto& c : r.table) {
    table.push_back({{"design", c.design},
                     {"delta_th", c.config.delta_th},
                     {"temperature", c.config.temperature},
                     {"delta", c.delta},
                     {"alpha", c.alpha},
                     {"abc_rl_qor", c.abc_rl_qor},
                     {"mcts_qor", c.mcts_qor},
                     {"mcts_l_qor", c.mcts_l_qor},
                     {"win", c.win}});
  }
  j["table"] = table;
  auto chosen = nlohmann::json::array();
  for (const auto& c : r.table) {
    if (c.config == r.best) chosen.push_back({{"design", c.design}, {"delta", c.delta}, {"alpha", c.alpha}});
  }
  j["chosen"] = chosen;
  j["scores"] = r.scores;
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string train_log_csv(const std::vector<TrainLogRow>& log) {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,mean_loss,buffer_size,wall_seconds\n";
  for (const auto& r : log) os << r.epoch << ',' << r.mean_loss << ',' << r.buffer_size << ',' << r.wall_seconds << '\n';
  return os.str();
}

}  // namespace abcrl
