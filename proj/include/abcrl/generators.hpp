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
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace abcrl {

// Parameters of the seeded random-AIG generator. Designs produced from the
// same parameters (different seeds) share their structural statistics.
struct RandomAigParams {
  uint32_t num_pis = 8;
  uint32_t num_pos = 4;
  uint32_t num_ands = 60;
  // Fan-ins are drawn from the most recent `window` signals, which controls depth.
  uint32_t window = 16;
  // Probability that a fan-in is drawn from the primary inputs instead.
  double pi_bias = 0.2;
  uint64_t seed = 1;
};

namespace detail {

inline uint64_t splitmix64(uint64_t& x) {
  uint64_t z = (x += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Unstrashed-looking random logic: redundant enough that every transform has
// work to do. Nodes not reaching an output are dropped.
inline Aig random_aig(const RandomAigParams& p, std::string name = "random") {
  uint64_t state = p.seed;
  auto next = [&] { return detail::splitmix64(state); };
  auto uniform = [&](uint64_t bound) { return next() % bound; };

  AigBuilder b(p.num_pis, name);
  std::vector<Literal> signals;
  for (uint32_t i = 0; i < p.num_pis; ++i) signals.push_back(b.pi(i));
  const uint64_t bias_threshold = static_cast<uint64_t>(p.pi_bias * 1000.0);

  auto pick = [&]() {
    Literal l;
    if (p.num_pis > 0 && uniform(1000) < bias_threshold) {
      l = signals[uniform(p.num_pis)];
    } else {
      const std::size_t w = std::min<std::size_t>(p.window, signals.size());
      l = signals[signals.size() - 1 - uniform(w)];
    }
    return l ^ (uniform(2) == 1);
  };

  uint32_t attempts = 0;
  while (b.num_ands() < p.num_ands && attempts < 50 * (p.num_ands + 1)) {
    ++attempts;
    const Literal a = pick();
    const Literal c = pick();
    const uint32_t before = b.num_ands();
    const Literal r = b.and_(a, c);
    if (b.num_ands() > before) signals.push_back(r);
  }
  // Outputs are taken from the last created signals so the cones are deep.
  for (uint32_t o = 0; o < p.num_pos; ++o) {
    const std::size_t span = std::min<std::size_t>(signals.size(), std::max<uint32_t>(p.num_pos * 2, 4));
    b.add_output(signals[signals.size() - 1 - uniform(span)] ^ (uniform(2) == 1));
  }
  return strash(std::move(b).build());
}

// Mixed gate-level logic (AND/OR/XOR/MAJ/MUX over a sliding window). XOR and
// majority keep the output functions balanced, so the designs do not collapse
// under optimization the way pure random AND logic does.
struct RandomGateParams {
  uint32_t num_pis = 10;
  uint32_t num_pos = 6;
  uint32_t num_gates = 40;
  uint32_t window = 12;
  // Relative weights of AND, OR, XOR, MAJ, MUX.
  std::array<uint32_t, 5> weights = {3, 3, 2, 1, 1};
  uint64_t seed = 1;
};

inline Aig random_gate_network(const RandomGateParams& p, std::string name = "gates") {
  uint64_t state = p.seed;
  auto uniform = [&](uint64_t bound) { return detail::splitmix64(state) % bound; };
  AigBuilder b(p.num_pis, std::move(name));
  std::vector<Literal> signals;
  for (uint32_t i = 0; i < p.num_pis; ++i) signals.push_back(b.pi(i));
  auto pick = [&]() {
    const std::size_t w = std::min<std::size_t>(p.window, signals.size());
    return signals[signals.size() - 1 - uniform(w)] ^ (uniform(2) == 1);
  };
  uint32_t total = 0;
  for (auto w : p.weights) total += w;
  for (uint32_t g = 0; g < p.num_gates && total > 0 && !signals.empty(); ++g) {
    uint64_t r = uniform(total);
    uint32_t type = 0;
    while (r >= p.weights[type]) r -= p.weights[type++];
    const Literal x = pick(), y = pick(), z = pick();
    Literal out;
    switch (type) {
      case 0: out = b.and_(x, y); break;
      case 1: out = b.or_(x, y); break;
      case 2: out = b.xor_(x, y); break;
      case 3: out = b.or_(b.or_(b.and_(x, y), b.and_(x, z)), b.and_(y, z)); break;
      default: out = b.mux(x, y, z); break;
    }
    if (out.node() != 0) signals.push_back(out);
  }
  for (uint32_t o = 0; o < p.num_pos; ++o) {
    const std::size_t span = std::min<std::size_t>(signals.size(), std::max<uint32_t>(p.num_pos * 2, 4));
    b.add_output(signals[signals.size() - 1 - uniform(span)] ^ (uniform(2) == 1));
  }
  return strash(std::move(b).build());
}

// Ripple-carry adder of two `bits`-wide operands with carry out; XORs are built
// from three ANDs. Used as a structurally distinct (arithmetic) design.
inline Aig ripple_adder(uint32_t bits, std::string name = "adder") {
  AigBuilder b(2 * bits, std::move(name));
  Literal carry = kFalse;
  for (uint32_t i = 0; i < bits; ++i) {
    const Literal x = b.pi(i);
    const Literal y = b.pi(bits + i);
    const Literal t = b.xor_(x, y);
    b.add_output(b.xor_(t, carry));
    carry = b.or_(b.and_(x, y), b.and_(t, carry));
  }
  b.add_output(carry);
  return std::move(b).build();
}

// Array multiplier (bits x bits -> 2*bits).
inline Aig array_multiplier(uint32_t bits, std::string name = "multiplier") {
  AigBuilder b(2 * bits, std::move(name));
  std::vector<Literal> acc(2 * bits, kFalse);
  for (uint32_t j = 0; j < bits; ++j) {
    Literal carry = kFalse;
    for (uint32_t i = 0; i < bits; ++i) {
      const Literal pp = b.and_(b.pi(i), b.pi(bits + j));
      const Literal s = acc[i + j];
      const Literal t = b.xor_(s, pp);
      acc[i + j] = b.xor_(t, carry);
      carry = b.or_(b.and_(s, pp), b.and_(t, carry));
    }
    acc[j + bits] = carry;
  }
  for (auto l : acc) b.add_output(l);
  return std::move(b).build();
}

}  // namespace abcrl
