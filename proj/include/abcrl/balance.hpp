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

#include "aig.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <utility>
#include <vector>

namespace abcrl {

namespace detail {

// One pass: every maximal multi-input AND (grown through non-complemented,
// single-fanout AND edges) is rebuilt as a binary tree that always pairs the
// two shallowest operands.
inline Aig balance_pass(const Aig& source) {
  const Aig g = strash(source);
  std::vector<uint32_t> fanout(g.size(), 0);
  for (const auto& n : g.ands()) {
    ++fanout[n.fanin0.node()];
    ++fanout[n.fanin1.node()];
  }
  for (auto o : g.outputs()) ++fanout[o.node()];

  AigBuilder b(g.num_pis(), g.name());
  std::vector<Literal> map(g.size(), kFalse);
  std::vector<char> done(g.size(), 0);
  std::vector<uint32_t> level;  // levels of the nodes in b
  level.assign(1 + g.num_pis(), 0);
  for (uint32_t i = 0; i <= g.num_pis(); ++i) done[i] = 1;
  for (uint32_t i = 0; i < g.num_pis(); ++i) map[1 + i] = b.pi(i);

  auto level_of = [&](Literal l) { return level[l.node()]; };
  auto make_and = [&](Literal x, Literal y) {
    const Literal r = b.and_(x, y);
    if (r.node() == level.size()) level.push_back(1 + std::max(level_of(x), level_of(y)));
    return r;
  };

  // Leaves of the supergate rooted at n (original literals).
  auto collect = [&](uint32_t root) {
    std::vector<Literal> leaves;
    std::vector<uint32_t> stack{root};
    while (!stack.empty()) {
      const uint32_t n = stack.back();
      stack.pop_back();
      for (Literal f : {g.fanin0(n), g.fanin1(n)}) {
        if (!f.complemented() && g.is_and(f.node()) && fanout[f.node()] == 1) {
          stack.push_back(f.node());
        } else {
          leaves.push_back(f);
        }
      }
    }
    return leaves;
  };

  std::vector<std::pair<uint32_t, bool>> stack;
  for (auto o : g.outputs()) {
    stack.emplace_back(o.node(), false);
    while (!stack.empty()) {
      auto [n, ready] = stack.back();
      stack.pop_back();
      if (done[n]) continue;
      const auto leaves = collect(n);
      if (!ready) {
        stack.emplace_back(n, true);
        for (auto l : leaves) {
          if (!done[l.node()]) stack.emplace_back(l.node(), false);
        }
        continue;
      }
      std::vector<Literal> ops;
      bool zero = false;
      for (auto l : leaves) ops.push_back(map[l.node()] ^ l.complemented());
      std::sort(ops.begin(), ops.end());
      ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
      for (std::size_t i = 0; i + 1 < ops.size() && !zero; ++i) zero = ops[i] == !ops[i + 1];
      if (std::find(ops.begin(), ops.end(), kFalse) != ops.end()) zero = true;
      std::erase(ops, kTrue);
      Literal result;
      if (zero) {
        result = kFalse;
      } else if (ops.empty()) {
        result = kTrue;
      } else {
        // Min-heap on (level, literal) for deterministic pairing.
        using Item = std::pair<uint32_t, uint32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (auto l : ops) heap.emplace(level_of(l), l.raw());
        while (heap.size() > 1) {
          const Literal x = Literal::from_raw(heap.top().second);
          heap.pop();
          const Literal y = Literal::from_raw(heap.top().second);
          heap.pop();
          const Literal r = make_and(x, y);
          heap.emplace(level_of(r), r.raw());
        }
        result = Literal::from_raw(heap.top().second);
      }
      map[n] = result;
      done[n] = 1;
    }
    b.add_output(map[o.node()] ^ o.complemented());
  }
  return strash(std::move(b).build());
}

}  // namespace detail

/// Repeats balancing passes while they strictly improve (levels, then nodes),
/// so balance(balance(g)) has the stats of balance(g).
inline Aig balance(const Aig& source) {
  Aig cur = strash(source);
  AigStats cs = stats(cur);
  for (int pass = 0; pass < 32; ++pass) {
    Aig next = detail::balance_pass(cur);
    const AigStats ns = stats(next);
    const bool better = ns.num_levels < cs.num_levels || (ns.num_levels == cs.num_levels && ns.num_nodes < cs.num_nodes);
    if (!better) break;
    cur = std::move(next);
    cs = ns;
  }
  return cur;
}

}  // namespace abcrl
