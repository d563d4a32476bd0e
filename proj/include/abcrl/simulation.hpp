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
  \file simulation.hpp
  \brief Bit-parallel simulation and simulation-based equivalence checking.
*/

#pragma once

#include "aig.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace abcrl {

/// Patterns per simulation word.
inline constexpr unsigned kSimWordBits = 64;

/// Simulates `words_per_pi` words per input; input i occupies
/// `inputs[i*words_per_pi .. (i+1)*words_per_pi)`. Returns one row per node.
inline std::vector<uint64_t> simulate_nodes(const Aig& g, std::span<const uint64_t> inputs, std::size_t words_per_pi) {
  if (inputs.size() != std::size_t{g.num_pis()} * words_per_pi) {
    throw std::invalid_argument("simulation input has " + std::to_string(inputs.size()) + " words, expected " +
                                std::to_string(std::size_t{g.num_pis()} * words_per_pi));
  }
  const std::size_t w = words_per_pi;
  std::vector<uint64_t> value(std::size_t{g.size()} * w, 0);
  std::copy(inputs.begin(), inputs.end(), value.begin() + static_cast<std::ptrdiff_t>(w));
  for (uint32_t n = g.first_and(); n < g.size(); ++n) {
    const auto& a = g.and_node(n);
    const uint64_t m0 = a.fanin0.complemented() ? ~uint64_t{0} : 0;
    const uint64_t m1 = a.fanin1.complemented() ? ~uint64_t{0} : 0;
    const uint64_t* v0 = &value[a.fanin0.node() * w];
    const uint64_t* v1 = &value[a.fanin1.node() * w];
    uint64_t* out = &value[n * w];
    for (std::size_t k = 0; k < w; ++k) out[k] = (v0[k] ^ m0) & (v1[k] ^ m1);
  }
  return value;
}

inline std::vector<uint64_t> simulate_outputs(const Aig& g, std::span<const uint64_t> inputs, std::size_t words_per_pi) {
  const auto value = simulate_nodes(g, inputs, words_per_pi);
  std::vector<uint64_t> out;
  out.reserve(g.num_pos() * words_per_pi);
  for (auto o : g.outputs()) {
    const uint64_t mask = o.complemented() ? ~uint64_t{0} : 0;
    for (std::size_t k = 0; k < words_per_pi; ++k) out.push_back(value[o.node() * words_per_pi + k] ^ mask);
  }
  return out;
}

/// One 64-bit word per PI; bit i of output word j is PO j under pattern i.
inline std::vector<uint64_t> simulate(const Aig& g, std::span<const uint64_t> input_words) {
  if (input_words.size() != g.num_pis()) {
    throw std::invalid_argument("simulate expects " + std::to_string(g.num_pis()) + " input words, got " +
                                std::to_string(input_words.size()));
  }
  return simulate_outputs(g, input_words, 1);
}

struct ExhaustiveCheck {};

/// Random simulation: "equivalent" only means no vector distinguished the two.
struct RandomCheck {
  uint64_t seed = 1;
  uint64_t num_vectors = uint64_t{1} << 16;
};

using EquivalenceMode = std::variant<ExhaustiveCheck, RandomCheck>;

inline constexpr uint32_t kMaxExhaustivePis = 20;

struct EquivalenceResult {
  bool equivalent = true;
  std::vector<bool> counterexample;  // PI assignment, empty when equivalent
  uint32_t output = 0;               // first differing output
};

namespace detail {

inline std::optional<EquivalenceResult> compare_block(const Aig& g1, const Aig& g2, const std::vector<uint64_t>& inputs,
                                                      std::size_t words, uint64_t last_word_mask) {
  const auto o1 = simulate_outputs(g1, inputs, words);
  const auto o2 = simulate_outputs(g2, inputs, words);
  for (uint32_t o = 0; o < g1.num_pos(); ++o) {
    for (std::size_t k = 0; k < words; ++k) {
      uint64_t diff = o1[o * words + k] ^ o2[o * words + k];
      if (k + 1 == words) diff &= last_word_mask;
      if (!diff) continue;
      const unsigned bit = static_cast<unsigned>(std::countr_zero(diff));
      EquivalenceResult r;
      r.equivalent = false;
      r.output = o;
      r.counterexample.resize(g1.num_pis());
      for (uint32_t i = 0; i < g1.num_pis(); ++i) r.counterexample[i] = (inputs[i * words + k] >> bit) & 1u;
      return r;
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline EquivalenceResult check_equivalence(const Aig& g1, const Aig& g2, const EquivalenceMode& mode = ExhaustiveCheck{}) {
  if (g1.num_pis() != g2.num_pis() || g1.num_pos() != g2.num_pos()) {
    throw std::invalid_argument("equivalence check needs matching interfaces (" + std::to_string(g1.num_pis()) + "/" +
                                std::to_string(g1.num_pos()) + " vs " + std::to_string(g2.num_pis()) + "/" +
                                std::to_string(g2.num_pos()) + ")");
  }
  const uint32_t n = g1.num_pis();
  constexpr std::size_t kBlockWords = 64;
  if (std::holds_alternative<ExhaustiveCheck>(mode)) {
    if (n > kMaxExhaustivePis) throw std::invalid_argument("exhaustive equivalence is limited to 20 inputs");
    const uint64_t total = uint64_t{1} << n;
    const uint64_t total_words = (total + 63) / 64;
    const uint64_t last_mask = total >= 64 ? ~uint64_t{0} : (uint64_t{1} << total) - 1;
    static constexpr uint64_t kVarMask[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                                             0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
    for (uint64_t base = 0; base < total_words; base += kBlockWords) {
      const std::size_t words = static_cast<std::size_t>(std::min<uint64_t>(kBlockWords, total_words - base));
      std::vector<uint64_t> inputs(n * words);
      for (uint32_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < words; ++k) {
          inputs[i * words + k] = i < 6 ? kVarMask[i] : ((((base + k) >> (i - 6)) & 1u) ? ~uint64_t{0} : 0);
        }
      }
      const uint64_t mask = base + words == total_words ? last_mask : ~uint64_t{0};
      if (auto r = detail::compare_block(g1, g2, inputs, words, mask)) return *r;
    }
    return {};
  }
  const auto& rnd = std::get<RandomCheck>(mode);
  std::mt19937_64 rng(rnd.seed);
  const uint64_t total_words = (rnd.num_vectors + 63) / 64;
  for (uint64_t base = 0; base < total_words; base += kBlockWords) {
    const std::size_t words = static_cast<std::size_t>(std::min<uint64_t>(kBlockWords, total_words - base));
    std::vector<uint64_t> inputs(n * words);
    for (auto& w : inputs) w = rng();
    if (auto r = detail::compare_block(g1, g2, inputs, words, ~uint64_t{0})) return *r;
  }
  return {};
}

/// Exhaustive for small interfaces, random (2^16 vectors) otherwise.
inline EquivalenceResult check_equivalence_auto(const Aig& g1, const Aig& g2, uint32_t exhaustive_limit = 16,
                                                uint64_t seed = 1) {
  if (g1.num_pis() <= exhaustive_limit) return check_equivalence(g1, g2, ExhaustiveCheck{});
  return check_equivalence(g1, g2, RandomCheck{seed, uint64_t{1} << 16});
}

}  // namespace abcrl
