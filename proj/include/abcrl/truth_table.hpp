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
  \file truth_table.hpp
  \brief Truth tables over up to 16 variables, stored as 64-bit words.
*/

#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstdint>
#include <functional>
#include <vector>

namespace abcrl {

class TruthTable {
 public:
  TruthTable() = default;
  explicit TruthTable(uint32_t num_vars) : num_vars_(num_vars), words_(num_words(num_vars), 0) {}

  static uint32_t num_words(uint32_t num_vars) { return num_vars <= 6 ? 1u : (1u << (num_vars - 6)); }

  static TruthTable nth_var(uint32_t num_vars, uint32_t var) {
    static constexpr uint64_t kMask[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                                          0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
    TruthTable t(num_vars);
    for (std::size_t k = 0; k < t.words_.size(); ++k) {
      t.words_[k] = var < 6 ? kMask[var] : (((k >> (var - 6)) & 1u) ? ~uint64_t{0} : 0);
    }
    t.mask();
    return t;
  }

  static TruthTable constant(uint32_t num_vars, bool value) {
    TruthTable t(num_vars);
    if (value) {
      std::fill(t.words_.begin(), t.words_.end(), ~uint64_t{0});
      t.mask();
    }
    return t;
  }

  uint32_t num_vars() const { return num_vars_; }
  uint64_t num_bits() const { return uint64_t{1} << num_vars_; }
  const std::vector<uint64_t>& words() const { return words_; }
  std::vector<uint64_t>& words() { return words_; }

  bool bit(uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

  bool is_const0() const {
    return std::all_of(words_.begin(), words_.end(), [](uint64_t w) { return w == 0; });
  }
  bool is_const1() const { return (~*this).is_const0(); }

  TruthTable operator~() const {
    TruthTable t = *this;
    for (auto& w : t.words_) w = ~w;
    t.mask();
    return t;
  }
  TruthTable operator&(const TruthTable& o) const { return zip(o, [](uint64_t a, uint64_t b) { return a & b; }); }
  TruthTable operator|(const TruthTable& o) const { return zip(o, [](uint64_t a, uint64_t b) { return a | b; }); }
  TruthTable operator^(const TruthTable& o) const { return zip(o, [](uint64_t a, uint64_t b) { return a ^ b; }); }
  bool operator==(const TruthTable& o) const = default;

  /// True when this implies o (this & ~o == 0).
  bool implies(const TruthTable& o) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if (words_[k] & ~o.words_[k]) return false;
    }
    return true;
  }

  TruthTable cofactor(uint32_t var, bool value) const {
    TruthTable t(num_vars_);
    if (var < 6) {
      const unsigned shift = 1u << var;
      const uint64_t m = nth_var(std::min<uint32_t>(num_vars_, 6), var).words_[0];
      for (std::size_t k = 0; k < words_.size(); ++k) {
        const uint64_t w = words_[k];
        t.words_[k] = value ? ((w & m) | ((w & m) >> shift)) : ((w & ~m) | ((w & ~m) << shift));
      }
    } else {
      const std::size_t step = std::size_t{1} << (var - 6);
      for (std::size_t k = 0; k < words_.size(); ++k) {
        const std::size_t src = value ? (k | step) : (k & ~step);
        t.words_[k] = words_[src];
      }
    }
    t.mask();
    return t;
  }

  bool depends_on(uint32_t var) const { return cofactor(var, false) != cofactor(var, true); }

  uint32_t support_size() const {
    uint32_t s = 0;
    for (uint32_t v = 0; v < num_vars_; ++v) s += depends_on(v) ? 1 : 0;
    return s;
  }

  std::size_t hash() const {
    std::size_t h = num_vars_;
    for (auto w : words_) h = h * 0x9E3779B97F4A7C15ull ^ std::hash<uint64_t>{}(w);
    return h;
  }

 private:
  template <class F>
  TruthTable zip(const TruthTable& o, F f) const {
    assert(o.num_vars_ == num_vars_);
    TruthTable t(num_vars_);
    for (std::size_t k = 0; k < words_.size(); ++k) t.words_[k] = f(words_[k], o.words_[k]);
    return t;
  }

  void mask() {
    if (num_vars_ < 6) words_[0] &= (uint64_t{1} << (1u << num_vars_)) - 1;
  }

  uint32_t num_vars_ = 0;
  std::vector<uint64_t> words_ = std::vector<uint64_t>(1, 0);
};

struct TruthTableHash {
  std::size_t operator()(const TruthTable& t) const { return t.hash(); }
};

}  // namespace abcrl
