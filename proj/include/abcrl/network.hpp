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
  \file network.hpp
  \brief Mutable AIG used by the in-place passes (rewrite, refactor, resub).

  Keeps reference counts, fanout lists, a structural hash table and 1024-bit
  random simulation signatures. Node indices are never reused; replaced nodes
  are marked dead. Index order is topological only for the nodes copied from
  the source Aig; to_aig() rebuilds a clean topological Aig.
*/

#pragma once

#include "aig.hpp"
#include "generators.hpp"
#include "truth_table.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace abcrl {

class Network {
 public:
  static constexpr uint32_t kSigWords = 16;
  using Signature = std::array<uint64_t, kSigWords>;

  explicit Network(const Aig& source, uint64_t sig_seed = 0xC0FFEE) : num_pis_(source.num_pis()) {
    const Aig g = strash(source);
    name_ = g.name();
    nodes_.resize(g.size());
    fanouts_.resize(g.size());
    sigs_.resize(g.size());
    uint64_t state = sig_seed;
    for (uint32_t i = 1; i <= num_pis_; ++i) {
      for (auto& w : sigs_[i]) w = detail::splitmix64(state);
    }
    for (uint32_t n = g.first_and(); n < g.size(); ++n) {
      nodes_[n].f0 = g.fanin0(n);
      nodes_[n].f1 = g.fanin1(n);
      attach(n);
    }
    outputs_ = g.outputs();
    for (auto o : outputs_) ++nodes_[o.node()].refs;
  }

  const std::string& name() const { return name_; }
  uint32_t num_pis() const { return num_pis_; }
  uint32_t size() const { return static_cast<uint32_t>(nodes_.size()); }
  bool is_pi(uint32_t n) const { return n >= 1 && n <= num_pis_; }
  bool is_and(uint32_t n) const { return n > num_pis_ && n < size(); }
  bool alive(uint32_t n) const { return n < size() && !nodes_[n].dead; }
  Literal fanin0(uint32_t n) const { return nodes_[n].f0; }
  Literal fanin1(uint32_t n) const { return nodes_[n].f1; }
  uint32_t refs(uint32_t n) const { return nodes_[n].refs; }
  const std::vector<uint32_t>& fanouts(uint32_t n) const { return fanouts_[n]; }
  const std::vector<Literal>& outputs() const { return outputs_; }
  const Signature& signature(uint32_t n) const { return sigs_[n]; }

  uint32_t num_live_ands() const {
    uint32_t c = 0;
    for (uint32_t n = num_pis_ + 1; n < size(); ++n) c += nodes_[n].dead ? 0 : 1;
    return c;
  }

  /// Folded literal or an existing live node; nothing when a node would be created.
  std::optional<Literal> lookup(Literal a, Literal b) const {
    if (auto f = fold_and(a, b)) return f;
    auto it = strash_.find(and_key(a, b));
    if (it == strash_.end()) return std::nullopt;
    return Literal(it->second, false);
  }

  Literal and_(Literal a, Literal b) {
    if (auto hit = lookup(a, b)) return *hit;
    if (a.raw() < b.raw()) std::swap(a, b);
    const uint32_t n = size();
    nodes_.push_back({a, b, 0, false});
    fanouts_.emplace_back();
    sigs_.emplace_back();
    attach(n);
    return Literal(n, false);
  }

  /// Called with every node whose fan-ins were redirected by substitute().
  void set_change_hook(std::function<void(uint32_t)> hook) { hook_ = std::move(hook); }

  /// Redirects all references of `old` to `repl` (which must not depend on
  /// `old`), cascading strash merges, and deletes the dead logic.
  void substitute(uint32_t old, Literal repl) {
    std::vector<std::pair<uint32_t, Literal>> work;
    auto push = [&](uint32_t x, Literal y) {
      ++nodes_[y.node()].refs;  // hold until processed
      work.emplace_back(x, y);
    };
    push(old, repl);
    while (!work.empty()) {
      auto [x, y] = work.back();
      work.pop_back();
      if (!nodes_[x].dead && x != y.node()) redirect(x, y, push);
      release(y.node());
    }
  }

  /// Removes unreferenced AND nodes with index >= from (e.g. an unused trial structure).
  void cleanup_dangling(uint32_t from) {
    for (uint32_t n = size(); n-- > std::max(from, num_pis_ + 1);) {
      if (!nodes_[n].dead && nodes_[n].refs == 0) kill(n);
    }
  }

  /// Dereferences the maximum fanout-free cone of n bounded by `is_leaf`;
  /// returns its size and optionally collects its nodes (root first).
  template <class LeafPred>
  uint32_t deref_mffc(uint32_t n, const LeafPred& is_leaf, std::vector<uint32_t>* cone = nullptr) {
    if (cone) cone->push_back(n);
    uint32_t count = 1;
    for (Literal f : {nodes_[n].f0, nodes_[n].f1}) {
      const uint32_t c = f.node();
      if (!is_and(c) || is_leaf(c)) continue;
      if (--nodes_[c].refs == 0) count += deref_mffc(c, is_leaf, cone);
    }
    return count;
  }

  template <class LeafPred>
  void ref_mffc(uint32_t n, const LeafPred& is_leaf) {
    for (Literal f : {nodes_[n].f0, nodes_[n].f1}) {
      const uint32_t c = f.node();
      if (!is_and(c) || is_leaf(c)) continue;
      if (nodes_[c].refs++ == 0) ref_mffc(c, is_leaf);
    }
  }

  /// MFFC size without modifying the network.
  template <class LeafPred>
  uint32_t mffc_size(uint32_t n, const LeafPred& is_leaf, std::vector<uint32_t>* cone = nullptr) {
    const uint32_t s = deref_mffc(n, is_leaf, cone);
    ref_mffc(n, is_leaf);
    return s;
  }

  Aig to_aig() const {
    AigBuilder b(num_pis_, name_);
    std::vector<Literal> map(size(), kFalse);
    std::vector<char> done(size(), 0);
    for (uint32_t i = 0; i <= num_pis_; ++i) done[i] = 1;
    for (uint32_t i = 1; i <= num_pis_; ++i) map[i] = b.pi(i - 1);
    std::vector<uint32_t> stack;
    for (auto o : outputs_) {
      stack.push_back(o.node());
      while (!stack.empty()) {
        const uint32_t n = stack.back();
        if (done[n]) {
          stack.pop_back();
          continue;
        }
        const uint32_t a = nodes_[n].f0.node();
        const uint32_t c = nodes_[n].f1.node();
        if (!done[a]) {
          stack.push_back(a);
          continue;
        }
        if (!done[c]) {
          stack.push_back(c);
          continue;
        }
        map[n] = b.and_(map[a] ^ nodes_[n].f0.complemented(), map[c] ^ nodes_[n].f1.complemented());
        done[n] = 1;
        stack.pop_back();
      }
      b.add_output(map[o.node()] ^ o.complemented());
    }
    return strash(std::move(b).build());
  }

 private:
  struct Node {
    Literal f0, f1;
    uint32_t refs = 0;
    bool dead = false;
  };

  void attach(uint32_t n) {
    auto& nd = nodes_[n];
    strash_[and_key(nd.f0, nd.f1)] = n;
    for (Literal f : {nd.f0, nd.f1}) {
      ++nodes_[f.node()].refs;
      fanouts_[f.node()].push_back(n);
    }
    compute_sig(n);
  }

  void compute_sig(uint32_t n) {
    const auto& nd = nodes_[n];
    const uint64_t m0 = nd.f0.complemented() ? ~uint64_t{0} : 0;
    const uint64_t m1 = nd.f1.complemented() ? ~uint64_t{0} : 0;
    const auto& s0 = sigs_[nd.f0.node()];
    const auto& s1 = sigs_[nd.f1.node()];
    for (uint32_t k = 0; k < kSigWords; ++k) sigs_[n][k] = (s0[k] ^ m0) & (s1[k] ^ m1);
  }

  void unhash(uint32_t n) {
    auto it = strash_.find(and_key(nodes_[n].f0, nodes_[n].f1));
    if (it != strash_.end() && it->second == n) strash_.erase(it);
  }

  static void remove_one(std::vector<uint32_t>& v, uint32_t x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it != v.end()) v.erase(it);
  }

  void release(uint32_t n) {
    if (--nodes_[n].refs == 0 && is_and(n) && !nodes_[n].dead) kill(n);
  }

  void kill(uint32_t n) {
    std::vector<uint32_t> stack{n};
    while (!stack.empty()) {
      const uint32_t x = stack.back();
      stack.pop_back();
      if (nodes_[x].dead) continue;
      unhash(x);
      nodes_[x].dead = true;
      for (Literal f : {nodes_[x].f0, nodes_[x].f1}) {
        const uint32_t c = f.node();
        remove_one(fanouts_[c], x);
        if (--nodes_[c].refs == 0 && is_and(c)) stack.push_back(c);
      }
    }
  }

  template <class Push>
  void redirect(uint32_t x, Literal y, const Push& push) {
    for (auto& o : outputs_) {
      if (o.node() != x) continue;
      o = y ^ o.complemented();
      ++nodes_[y.node()].refs;
      --nodes_[x].refs;
    }
    const auto fanouts = fanouts_[x];
    for (uint32_t f : fanouts) {
      if (nodes_[f].dead) continue;
      unhash(f);
      auto& nd = nodes_[f];
      for (Literal* l : {&nd.f0, &nd.f1}) {
        if (l->node() != x) continue;
        *l = y ^ l->complemented();
        ++nodes_[y.node()].refs;
        --nodes_[x].refs;
        fanouts_[y.node()].push_back(f);
      }
      if (nd.f0.raw() < nd.f1.raw()) std::swap(nd.f0, nd.f1);
      if (hook_) hook_(f);
      if (auto folded = fold_and(nd.f0, nd.f1)) {
        push(f, *folded);
        continue;
      }
      const uint64_t key = and_key(nd.f0, nd.f1);
      auto it = strash_.find(key);
      if (it != strash_.end() && it->second != f) {
        push(f, Literal(it->second, false));
        continue;
      }
      strash_[key] = f;
    }
    fanouts_[x].clear();
    if (nodes_[x].refs == 0) kill(x);
  }

  std::string name_;
  uint32_t num_pis_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::vector<uint32_t>> fanouts_;
  std::vector<Signature> sigs_;
  std::vector<Literal> outputs_;
  std::unordered_map<uint64_t, uint32_t> strash_;
  std::function<void(uint32_t)> hook_;
};

/// Counts the AND nodes a construction would add to a network without
/// modifying it. Nodes with zero references (a dereferenced MFFC) count as added.
class DryRunBuilder {
 public:
  DryRunBuilder(const Network& net, uint32_t root) : net_(net), root_(root), next_(net.size()) {}

  Literal and_(Literal a, Literal b) {
    if (auto f = fold_and(a, b)) return *f;
    if (a.node() < net_.size() && b.node() < net_.size()) {
      if (auto hit = net_.lookup(a, b)) {
        const uint32_t n = hit->node();
        if (n == root_) root_hit_ = true;
        if (net_.refs(n) == 0 && std::find(revived_.begin(), revived_.end(), n) == revived_.end()) {
          revived_.push_back(n);
          ++added_;
        }
        return *hit;
      }
    }
    const uint64_t key = and_key(a, b);
    auto it = fresh_.find(key);
    if (it != fresh_.end()) return Literal(it->second, false);
    ++added_;
    fresh_.emplace(key, next_);
    return Literal(next_++, false);
  }

  uint32_t added() const { return added_; }
  bool root_hit() const { return root_hit_; }
  bool is_fresh(Literal l) const { return l.node() >= net_.size(); }

 private:
  const Network& net_;
  uint32_t root_;
  uint32_t next_;
  uint32_t added_ = 0;
  bool root_hit_ = false;
  std::vector<uint32_t> revived_;
  std::unordered_map<uint64_t, uint32_t> fresh_;
};

/// Reconvergence-driven cut: grows the leaf set of `root` by expanding the
/// leaf adding the fewest new leaves, while staying within `max_leaves` and
/// `max_depth` levels from the root. Leaves are returned sorted.
inline std::vector<uint32_t> reconvergent_cut(const Network& net, uint32_t root, uint32_t max_leaves,
                                              uint32_t max_depth = ~0u) {
  std::vector<std::pair<uint32_t, uint32_t>> leaves;  // (node, depth)
  std::vector<uint32_t> visited{root};
  auto seen = [&](uint32_t n) { return std::find(visited.begin(), visited.end(), n) != visited.end(); };
  for (Literal f : {net.fanin0(root), net.fanin1(root)}) {
    if (!seen(f.node())) {
      visited.push_back(f.node());
      leaves.emplace_back(f.node(), 1);
    }
  }
  while (true) {
    int best = -1;
    int best_cost = 100;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const auto [n, d] = leaves[i];
      if (!net.is_and(n) || d >= max_depth) continue;
      int cost = -1;
      cost += seen(net.fanin0(n).node()) ? 0 : 1;
      cost += seen(net.fanin1(n).node()) ? 0 : 1;
      if (cost < best_cost || (cost == best_cost && n < leaves[static_cast<std::size_t>(best)].first)) {
        best = static_cast<int>(i);
        best_cost = cost;
      }
    }
    if (best < 0 || leaves.size() + static_cast<std::size_t>(best_cost) > max_leaves) break;
    const auto [n, d] = leaves[static_cast<std::size_t>(best)];
    leaves.erase(leaves.begin() + best);
    for (Literal f : {net.fanin0(n), net.fanin1(n)}) {
      if (seen(f.node())) continue;
      visited.push_back(f.node());
      leaves.emplace_back(f.node(), d + 1);
    }
  }
  std::vector<uint32_t> out;
  for (auto [n, d] : leaves) out.push_back(n);
  std::sort(out.begin(), out.end());
  return out;
}

/// Nodes strictly inside the cone of `root` above `leaves`, in topological order (root last).
inline std::vector<uint32_t> cone_nodes(const Network& net, uint32_t root, const std::vector<uint32_t>& leaves) {
  std::vector<uint32_t> order;
  std::vector<uint32_t> marked(leaves);
  auto is_marked = [&](uint32_t n) { return std::find(marked.begin(), marked.end(), n) != marked.end(); };
  std::vector<std::pair<uint32_t, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      if (!is_marked(n)) {
        marked.push_back(n);
        order.push_back(n);
      }
      continue;
    }
    if (is_marked(n)) continue;
    if (!net.is_and(n)) {
      // A PI or constant outside the leaf set: treat it as a leaf-like input.
      marked.push_back(n);
      continue;
    }
    stack.emplace_back(n, true);
    stack.emplace_back(net.fanin1(n).node(), false);
    stack.emplace_back(net.fanin0(n).node(), false);
  }
  return order;
}

/// Truth tables of the cone nodes over `leaves` (indexed like the cone vector).
/// Returns nothing when the leaves do not cut the cone.
inline std::optional<std::unordered_map<uint32_t, TruthTable>> cone_truth_tables(const Network& net,
                                                                                  const std::vector<uint32_t>& leaves,
                                                                                  const std::vector<uint32_t>& cone) {
  const auto k = static_cast<uint32_t>(leaves.size());
  std::unordered_map<uint32_t, TruthTable> tt;
  tt.emplace(0, TruthTable::constant(k, false));
  for (uint32_t i = 0; i < k; ++i) tt[leaves[i]] = TruthTable::nth_var(k, i);
  for (uint32_t n : cone) {
    auto a = tt.find(net.fanin0(n).node());
    auto b = tt.find(net.fanin1(n).node());
    if (a == tt.end() || b == tt.end()) return std::nullopt;
    const TruthTable x = net.fanin0(n).complemented() ? ~a->second : a->second;
    const TruthTable y = net.fanin1(n).complemented() ? ~b->second : b->second;
    tt[n] = x & y;
  }
  return tt;
}

}  // namespace abcrl
