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
  \file resub.hpp
  \brief Windowed 0- and 1-resubstitution.

  Candidates are proposed by comparing the network's 1024-pattern random
  signatures and confirmed on exact truth tables over the window leaves.
*/

#pragma once

#include "network.hpp"
#include "truth_table.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace abcrl {

struct ResubParams {
  bool zero_cost = false;
  uint32_t window_depth = 4;
  uint32_t max_leaves = 10;
  uint32_t max_divisors = 80;
};

namespace detail {

inline bool sig_equal(const Network::Signature& a, const Network::Signature& b, bool complement) {
  const uint64_t m = complement ? ~uint64_t{0} : 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != (b[k] ^ m)) return false;
  }
  return true;
}

// (target ^ ct) implies (d ^ cd)
inline bool sig_implies(const Network::Signature& target, bool ct, const Network::Signature& d, bool cd) {
  const uint64_t mt = ct ? ~uint64_t{0} : 0;
  const uint64_t md = cd ? ~uint64_t{0} : 0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    if ((target[k] ^ mt) & ~(d[k] ^ md)) return false;
  }
  return true;
}

}  // namespace detail

inline void resub_network(Network& net, const ResubParams& p = {}) {
  const uint32_t original = net.size();
  for (uint32_t n = net.num_pis() + 1; n < original; ++n) {
    if (!net.alive(n)) continue;
    const auto leaves = reconvergent_cut(net, n, p.max_leaves, p.window_depth);
    const auto cone = cone_nodes(net, n, leaves);
    auto tts = cone_truth_tables(net, leaves, cone);
    if (!tts) continue;
    auto is_leaf = [&](uint32_t x) { return std::binary_search(leaves.begin(), leaves.end(), x); };

    std::vector<uint32_t> mffc_nodes;
    const uint32_t mffc = net.deref_mffc(n, is_leaf, &mffc_nodes);
    net.ref_mffc(n, is_leaf);
    auto in_mffc = [&](uint32_t x) { return std::find(mffc_nodes.begin(), mffc_nodes.end(), x) != mffc_nodes.end(); };

    // Divisors: leaves, cone nodes outside the MFFC, then side nodes fed only by divisors.
    std::vector<uint32_t> divs(leaves.begin(), leaves.end());
    for (uint32_t x : cone) {
      if (x != n && !in_mffc(x)) divs.push_back(x);
    }
    for (std::size_t i = 0; i < divs.size() && divs.size() < p.max_divisors; ++i) {
      for (uint32_t f : net.fanouts(divs[i])) {
        if (divs.size() >= p.max_divisors) break;
        if (f == n || in_mffc(f) || tts->count(f)) continue;
        auto a = tts->find(net.fanin0(f).node());
        auto b = tts->find(net.fanin1(f).node());
        if (a == tts->end() || b == tts->end() || in_mffc(a->first) || in_mffc(b->first)) continue;
        if (a->first == n || b->first == n) continue;
        const TruthTable x = net.fanin0(f).complemented() ? ~a->second : a->second;
        const TruthTable y = net.fanin1(f).complemented() ? ~b->second : b->second;
        tts->emplace(f, x & y);
        divs.push_back(f);
      }
    }
    const TruthTable& target = tts->at(n);
    const auto& tsig = net.signature(n);

    std::optional<Literal> repl;
    // 0-resub.
    for (uint32_t d : divs) {
      for (bool c : {false, true}) {
        if (!detail::sig_equal(tsig, net.signature(d), c)) continue;
        const TruthTable& td = tts->at(d);
        if ((c ? ~td : td) == target) {
          repl = Literal(d, c);
          break;
        }
      }
      if (repl) break;
    }
    if (repl) {
      net.substitute(n, *repl);
      continue;
    }
    // 1-resub: target (or its complement) as the AND of two divisor literals.
    if (mffc >= 2 || (p.zero_cost && mffc >= 1)) {
      bool done = false;
      for (bool ct : {false, true}) {
        std::vector<Literal> cands;
        for (uint32_t d : divs) {
          for (bool cd : {false, true}) {
            if (detail::sig_implies(tsig, ct, net.signature(d), cd)) cands.emplace_back(d, cd);
          }
        }
        const TruthTable goal = ct ? ~target : target;
        for (std::size_t i = 0; i < cands.size() && !done; ++i) {
          for (std::size_t j = i + 1; j < cands.size() && !done; ++j) {
            if (cands[i].node() == cands[j].node()) continue;
            const auto& si = net.signature(cands[i].node());
            const auto& sj = net.signature(cands[j].node());
            bool ok = true;
            const uint64_t mt = ct ? ~uint64_t{0} : 0;
            const uint64_t mi = cands[i].complemented() ? ~uint64_t{0} : 0;
            const uint64_t mj = cands[j].complemented() ? ~uint64_t{0} : 0;
            for (std::size_t k = 0; k < Network::kSigWords && ok; ++k) ok = ((si[k] ^ mi) & (sj[k] ^ mj)) == (tsig[k] ^ mt);
            if (!ok) continue;
            const TruthTable& ti = tts->at(cands[i].node());
            const TruthTable& tj = tts->at(cands[j].node());
            const TruthTable prod = (cands[i].complemented() ? ~ti : ti) & (cands[j].complemented() ? ~tj : tj);
            if (prod != goal) continue;
            const auto hit = net.lookup(cands[i], cands[j]);
            if (hit && hit->node() == n) continue;
            const bool free = hit && !in_mffc(hit->node());
            const int g = static_cast<int>(mffc) - (free ? 0 : 1);
            if (g < 0 || (g == 0 && !p.zero_cost)) continue;
            done = true;
            const uint32_t from = net.size();
            const Literal r = net.and_(cands[i], cands[j]) ^ ct;
            if (r.node() != n) net.substitute(n, r);
            net.cleanup_dangling(from);
          }
        }
        if (done) break;
      }
    }
  }
}

inline Aig resub(const Aig& g, bool zero_cost = false) {
  Network net(g);
  resub_network(net, ResubParams{zero_cost});
  return net.to_aig();
}

}  // namespace abcrl
