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
  \file retrieval.hpp
  \brief Nearest-neighbour lookup of graph embeddings and the prior weight alpha.
*/

#pragma once

#include "binary_io.hpp"
#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace abcrl {

inline double cosine_distance(const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_distance: dimension mismatch");
  const double uu = u.dot(u);
  const double vv = v.dot(v);
  if (!(uu > 0.0) || !(vv > 0.0)) throw NumericError("cosine_distance: zero-norm vector");
  // sqrt(fl(x*x)) == x, so identical vectors give exactly 0.
  return std::clamp(1.0 - u.dot(v) / std::sqrt(uu * vv), 0.0, 2.0);
}

struct Neighbor {
  std::string name;
  std::size_t index = 0;
  double delta = 0.0;
};

class EmbeddingIndex {
 public:
  static constexpr uint32_t kVersion = 1;

  EmbeddingIndex() = default;
  explicit EmbeddingIndex(uint32_t dim) : dim_(dim) {}

  uint32_t dim() const { return dim_; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const Eigen::RowVectorXd& vector(std::size_t i) const { return vecs_[i]; }

  void add(std::string name, Eigen::RowVectorXd v) {
    if (dim_ == 0) dim_ = static_cast<uint32_t>(v.size());
    if (v.size() != dim_) throw std::invalid_argument("embedding index: dimension mismatch for " + name);
    if (!(v.norm() > 0.0) || !v.allFinite()) throw NumericError("embedding index: zero-norm or non-finite vector for " + name);
    names_.push_back(std::move(name));
    vecs_.push_back(std::move(v));
  }

  /// Exact linear scan; the first entry wins ties.
  Neighbor nearest(const Eigen::RowVectorXd& h) const {
    if (empty()) throw std::invalid_argument("nearest: empty index");
    Neighbor best{names_[0], 0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < vecs_.size(); ++i) {
      const double d = cosine_distance(h, vecs_[i]);
      if (d < best.delta) best = {names_[i], i, d};
    }
    return best;
  }

  void save(const std::filesystem::path& path) const {
    BinaryWriter w;
    w.magic("ABCRLIDX");
    w.u32(kVersion);
    w.u32(dim_);
    w.u32(static_cast<uint32_t>(names_.size()));
    for (std::size_t i = 0; i < names_.size(); ++i) {
      w.str(names_[i]);
      for (Eigen::Index j = 0; j < vecs_[i].size(); ++j) w.f64(vecs_[i](j));
    }
    w.save(path);
  }

  static EmbeddingIndex load(const std::filesystem::path& path) {
    auto r = BinaryReader::from_file(path);
    r.expect_magic("ABCRLIDX");
    if (r.u32() != kVersion) throw InputError(path.string() + ": unsupported index version");
    EmbeddingIndex idx(r.u32());
    const uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
      std::string name = r.str();
      Eigen::RowVectorXd v(idx.dim_);
      for (uint32_t j = 0; j < idx.dim_; ++j) v(j) = r.f64();
      idx.add(std::move(name), std::move(v));
    }
    if (!r.at_end()) throw InputError(path.string() + ": trailing bytes after index");
    return idx;
  }

 private:
  uint32_t dim_ = 0;
  std::vector<std::string> names_;
  std::vector<Eigen::RowVectorXd> vecs_;
};

struct AlphaConfig {
  double delta_th = 0.007;
  double temperature = 100.0;

  void validate() const {
    if (!(temperature > 0.0)) throw ConfigError("alpha: temperature must be positive");
  }
  bool operator==(const AlphaConfig&) const = default;
};

/// 1 / (1 + exp(-(delta - delta_th) / T)).
inline double compute_alpha(double delta, const AlphaConfig& c) {
  c.validate();
  return 1.0 / (1.0 + std::exp(-(delta - c.delta_th) / c.temperature));
}

inline std::vector<AlphaConfig> default_alpha_grid() {
  std::vector<AlphaConfig> grid;
  for (double th : {0.001, 0.003, 0.007, 0.01, 0.03}) {
    for (double t : {0.001, 0.01, 0.1, 1.0, 100.0}) grid.push_back({th, t});
  }
  return grid;
}

/// One validation design's outcome at one grid point.
struct TuneCell {
  std::string design;
  AlphaConfig config;
  double delta = 0.0;
  double alpha = 0.0;
  double abc_rl_qor = 0.0;
  double mcts_qor = 0.0;
  double mcts_l_qor = 0.0;
  bool win = false;  // abc_rl_qor >= max(mcts_qor, mcts_l_qor)
};

struct TuneResult {
  AlphaConfig best;
  std::vector<int> scores;  // per grid point
  std::vector<TuneCell> table;
};

/// Picks the grid point with most wins; ties go to smaller delta_th, then smaller T.
inline std::size_t select_grid_point(const std::vector<AlphaConfig>& grid, const std::vector<int>& scores) {
  if (grid.empty()) throw ConfigError("tune: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool better = scores[i] > scores[best] ||
                        (scores[i] == scores[best] && (grid[i].delta_th < grid[best].delta_th ||
                                                       (grid[i].delta_th == grid[best].delta_th && grid[i].temperature < grid[best].temperature)));
    if (better) best = i;
  }
  return best;
}

/// Scores a filled win/loss table (cells in design-major or any order).
inline TuneResult score_tuning(const std::vector<AlphaConfig>& grid, std::vector<TuneCell> table) {
  TuneResult r;
  r.scores.assign(grid.size(), 0);
  for (auto& c : table) {
    c.win = c.abc_rl_qor >= std::max(c.mcts_qor, c.mcts_l_qor);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] == c.config && c.win) ++r.scores[i];
    }
  }
  r.best = grid[select_grid_point(grid, r.scores)];
  r.table = std::move(table);
  return r;
}

}  // namespace abcrl
