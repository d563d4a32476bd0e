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
  \file rewrite.hpp
  \brief 4-feasible cut enumeration and DAG-aware rewriting against the NPN library.
*/

#pragma once

#include "errors.hpp"
#include "network.hpp"
#include "npn.hpp"
#include "rewrite_library.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace abcrl {

/// Cut of at most 4 sorted leaves; `tt` is the root function over the leaves
/// (leaf i is variable i, unused variables are don't-care).
struct Cut {
  std::array<uint32_t, 4> leaves{};
  uint8_t size = 0;
  Tt4 tt = 0;

  bool same_leaves(const Cut& o) const {
    return size == o.size && std::equal(leaves.begin(), leaves.begin() + size, o.leaves.begin());
  }
  bool dominates(const Cut& o) const {
    return size <= o.size && std::includes(o.leaves.begin(), o.leaves.begin() + o.size, leaves.begin(), leaves.begin() + size);
  }
};

/// Priority cuts with lazy recomputation; structural changes reported by the
/// network invalidate the memo along the transitive fanout.
class CutManager {
 public:
  explicit CutManager(Network& net, uint32_t cut_limit = 8) : net_(net), limit_(cut_limit) {
    net_.set_change_hook([this](uint32_t n) { invalidate(n); });
  }
  ~CutManager() { net_.set_change_hook(nullptr); }
  CutManager(const CutManager&) = delete;
  CutManager& operator=(const CutManager&) = delete;

  const std::vector<Cut>& cuts(uint32_t n) {
    grow();
    if (valid_[n]) return memo_[n];
    // Iterative post-order over fan-ins without a valid memo.
    std::vector<uint32_t> stack{n};
    while (!stack.empty()) {
      const uint32_t x = stack.back();
      if (valid_[x]) {
        stack.pop_back();
        continue;
      }
      if (!net_.is_and(x)) {
        memo_[x] = {trivial(x)};
        valid_[x] = 1;
        stack.pop_back();
        continue;
      }
      const uint32_t a = net_.fanin0(x).node();
      const uint32_t b = net_.fanin1(x).node();
      if (!valid_[a]) {
        stack.push_back(a);
        continue;
      }
      if (!valid_[b]) {
        stack.push_back(b);
        continue;
      }
      compute(x);
      stack.pop_back();
    }
    return memo_[n];
  }

  void invalidate(uint32_t n) {
    grow();
    std::vector<uint32_t> stack{n};
    while (!stack.empty()) {
      const uint32_t x = stack.back();
      stack.pop_back();
      if (!valid_[x]) continue;
      valid_[x] = 0;
      for (uint32_t f : net_.fanouts(x)) stack.push_back(f);
    }
  }

 private:
  static Cut trivial(uint32_t n) {
    Cut c;
    c.leaves[0] = n;
    c.size = 1;
    c.tt = kTt4Vars[0];
    return c;
  }

  void grow() {
    if (memo_.size() < net_.size()) {
      memo_.resize(net_.size());
      valid_.resize(net_.size(), 0);
    }
  }

  // Re-expresses `tt` over `from` leaves as a function over `to` leaves.
  static Tt4 expand(Tt4 tt, const Cut& from, const Cut& to) {
    std::array<uint8_t, 4> pos{};
    for (uint8_t i = 0; i < from.size; ++i) {
      pos[i] = static_cast<uint8_t>(std::find(to.leaves.begin(), to.leaves.begin() + to.size, from.leaves[i]) - to.leaves.begin());
    }
    Tt4 out = 0;
    for (unsigned m = 0; m < 16; ++m) {
      unsigned src = 0;
      for (uint8_t i = 0; i < from.size; ++i) src |= ((m >> pos[i]) & 1u) << i;
      out |= static_cast<Tt4>(((tt >> src) & 1u) << m);
    }
    return out;
  }

  void compute(uint32_t n) {
    const Literal f0 = net_.fanin0(n);
    const Literal f1 = net_.fanin1(n);
    const auto& c0 = memo_[f0.node()];
    const auto& c1 = memo_[f1.node()];
    std::vector<Cut> merged;
    for (const auto& a : c0) {
      for (const auto& b : c1) {
        Cut c;
        std::array<uint32_t, 8> u{};
        const auto last = std::set_union(a.leaves.begin(), a.leaves.begin() + a.size, b.leaves.begin(),
                                         b.leaves.begin() + b.size, u.begin());
        const auto k = static_cast<std::size_t>(last - u.begin());
        if (k > 4) continue;
        std::copy(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(k), c.leaves.begin());
        c.size = static_cast<uint8_t>(k);
        const Tt4 ta = static_cast<Tt4>(expand(a.tt, a, c) ^ (f0.complemented() ? 0xFFFF : 0));
        const Tt4 tb = static_cast<Tt4>(expand(b.tt, b, c) ^ (f1.complemented() ? 0xFFFF : 0));
        c.tt = static_cast<Tt4>(ta & tb);
        merged.push_back(c);
      }
    }
    std::stable_sort(merged.begin(), merged.end(), [](const Cut& x, const Cut& y) {
      if (x.size != y.size) return x.size < y.size;
      return std::lexicographical_compare(x.leaves.begin(), x.leaves.begin() + x.size, y.leaves.begin(), y.leaves.begin() + y.size);
    });
    std::vector<Cut> kept;
    for (const auto& c : merged) {
      if (kept.size() >= limit_) break;
      bool dominated = false;
      for (const auto& k : kept) dominated = dominated || k.dominates(c);
      if (!dominated) kept.push_back(c);
    }
    kept.push_back(trivial(n));
    memo_[n] = std::move(kept);
    valid_[n] = 1;
  }

  Network& net_;
  uint32_t limit_;
  std::vector<std::vector<Cut>> memo_;
  std::vector<char> valid_;
};

struct RewriteParams {
  bool zero_cost = false;
  uint32_t cut_limit = 8;
};

namespace detail {

inline std::array<Literal, 4> library_inputs(const Cut& cut, const NpnTransform& t) {
  std::array<Literal, 4> leaf{};
  for (uint8_t j = 0; j < 4; ++j) leaf[j] = j < cut.size ? Literal(cut.leaves[j], false) : kFalse;
  std::array<Literal, 4> in{};
  for (uint8_t i = 0; i < 4; ++i) in[i] = leaf[t.perm[i]] ^ static_cast<bool>((t.input_neg >> i) & 1u);
  return in;
}

}  // namespace detail

/// One rewriting pass over the network (nodes visited in index order).
inline void rewrite_network(Network& net, const RewriteLibrary& lib, const RewriteParams& p = {}) {
  if (lib.empty()) throw ConfigError("rewrite: no rewrite library loaded");
  const auto& npn = npn_table();
  CutManager cuts(net, p.cut_limit);
  const uint32_t original = net.size();
  for (uint32_t n = net.num_pis() + 1; n < original; ++n) {
    if (!net.alive(n)) continue;
    int best_gain = -1;
    std::optional<Cut> best_cut;
    const LibraryStructure* best_struct = nullptr;
    for (const Cut& cut : cuts.cuts(n)) {
      if (cut.size == 1 && cut.leaves[0] == n) continue;
      if (!std::all_of(cut.leaves.begin(), cut.leaves.begin() + cut.size, [&](uint32_t x) { return net.alive(x); })) continue;
      const Tt4 canon = npn.canonical(cut.tt);
      const LibraryStructure* s = lib.find(canon);
      if (!s) continue;
      const NpnTransform& t = npn.transform(cut.tt);
      auto is_leaf = [&](uint32_t x) { return std::find(cut.leaves.begin(), cut.leaves.begin() + cut.size, x) != cut.leaves.begin() + cut.size; };
      const uint32_t mffc = net.deref_mffc(n, is_leaf);
      DryRunBuilder dry(net, n);
      const Literal r = instantiate(*s, detail::library_inputs(cut, t), dry) ^ t.output_neg;
      net.ref_mffc(n, is_leaf);
      if (dry.root_hit() || r.node() == n) continue;
      const int gain = static_cast<int>(mffc) - static_cast<int>(dry.added());
      if (gain > best_gain) {
        best_gain = gain;
        best_cut = cut;
        best_struct = s;
      }
    }
    if (!best_cut || best_gain < 0 || (best_gain == 0 && !p.zero_cost)) continue;
    const NpnTransform& t = npn.transform(best_cut->tt);
    const uint32_t from = net.size();
    const Literal r = instantiate(*best_struct, detail::library_inputs(*best_cut, t), net) ^ t.output_neg;
    if (r.node() != n) net.substitute(n, r);
    net.cleanup_dangling(from);
  }
}

inline Aig rewrite(const Aig& g, bool zero_cost = false, const RewriteLibrary& lib = default_rewrite_library()) {
  Network net(g);
  rewrite_network(net, lib, RewriteParams{zero_cost});
  return net.to_aig();
}

}  // namespace abcrl
