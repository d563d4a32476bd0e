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

#pragma once

#include "network.hpp"
#include "truth_table.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace abcrl {

// Recursive Shannon decomposition of a cone function over `leaves`. Works
// with any builder providing and_(); sub-functions are shared through a memo.
template <class Builder>
class ShannonSynthesizer {
 public:
  ShannonSynthesizer(Builder& b, std::vector<Literal> leaves) : b_(b), leaves_(std::move(leaves)) {}

  Literal build(const TruthTable& f) {
    if (f.is_const0()) return kFalse;
    if (f.is_const1()) return kTrue;
    if (auto it = memo_.find(f); it != memo_.end()) return it->second;
    if (auto it = memo_.find(~f); it != memo_.end()) return !it->second;

    const uint32_t x = split_variable(f);
    const Literal v = leaves_[x];
    const TruthTable f0 = f.cofactor(x, false);
    const TruthTable f1 = f.cofactor(x, true);
    Literal r;
    if (f0.is_const0()) {
      r = b_.and_(v, build(f1));
    } else if (f1.is_const0()) {
      r = b_.and_(!v, build(f0));
    } else if (f0.is_const1()) {
      r = !b_.and_(v, !build(f1));
    } else if (f1.is_const1()) {
      r = !b_.and_(!v, !build(f0));
    } else if (f1 == ~f0) {
      const Literal g = build(f0);
      r = !b_.and_(!b_.and_(v, !g), !b_.and_(!v, g));
    } else {
      const Literal g1 = build(f1);
      const Literal g0 = build(f0);
      r = !b_.and_(!b_.and_(v, g1), !b_.and_(!v, g0));
    }
    memo_.emplace(f, r);
    return r;
  }

 private:
  // Prefers a variable with a constant cofactor, then an XOR split, then the
  // split with the smallest combined cofactor support.
  static uint32_t split_variable(const TruthTable& f) {
    uint32_t best = 0;
    uint32_t best_score = ~0u;
    for (uint32_t v = 0; v < f.num_vars(); ++v) {
      const TruthTable c0 = f.cofactor(v, false);
      const TruthTable c1 = f.cofactor(v, true);
      if (c0 == c1) continue;
      uint32_t score;
      if (c0.is_const0() || c0.is_const1() || c1.is_const0() || c1.is_const1()) {
        score = 0;
      } else if (c1 == ~c0) {
        score = 1;
      } else {
        score = 2 + c0.support_size() + c1.support_size();
      }
      if (score < best_score) {
        best_score = score;
        best = v;
      }
    }
    return best;
  }

  Builder& b_;
  std::vector<Literal> leaves_;
  std::unordered_map<TruthTable, Literal, TruthTableHash> memo_;
};

struct RefactorParams {
  bool zero_cost = false;
  uint32_t max_leaves = 10;
};

inline void refactor_network(Network& net, const RefactorParams& p = {}) {
  const uint32_t original = net.size();
  for (uint32_t n = net.num_pis() + 1; n < original; ++n) {
    if (!net.alive(n)) continue;
    const auto leaves = reconvergent_cut(net, n, p.max_leaves);
    const auto cone = cone_nodes(net, n, leaves);
    if (cone.size() < 2) continue;
    const auto tts = cone_truth_tables(net, leaves, cone);
    if (!tts) continue;
    const TruthTable& f = tts->at(n);
    std::vector<Literal> leaf_lits;
    for (uint32_t l : leaves) leaf_lits.emplace_back(l, false);
    auto is_leaf = [&](uint32_t x) { return std::binary_search(leaves.begin(), leaves.end(), x); };

    const uint32_t mffc = net.deref_mffc(n, is_leaf);
    DryRunBuilder dry(net, n);
    const Literal trial = ShannonSynthesizer<DryRunBuilder>(dry, leaf_lits).build(f);
    net.ref_mffc(n, is_leaf);
    if (dry.root_hit() || trial.node() == n) continue;
    const int gain = static_cast<int>(mffc) - static_cast<int>(dry.added());
    if (gain < 0 || (gain == 0 && !p.zero_cost)) continue;

    const uint32_t from = net.size();
    const Literal r = ShannonSynthesizer<Network>(net, leaf_lits).build(f);
    if (r.node() != n) net.substitute(n, r);
    net.cleanup_dangling(from);
  }
}

inline Aig refactor(const Aig& g, bool zero_cost = false, uint32_t max_leaves = 10) {
  Network net(g);
  refactor_network(net, RefactorParams{zero_cost, max_leaves});
  return net.to_aig();
}

}  // namespace abcrl
