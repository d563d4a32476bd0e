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
  \file npn.hpp
  \brief NPN canonization of 4-input functions.

  A transform T = (perm, input_neg, output_neg) maps f to
  T(f)(x) = output_neg ^ f(y) with y_i = x_{perm[i]} ^ input_neg_i.
  The canonical representative of a class is its numerically smallest member.
*/

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

namespace abcrl {

using Tt4 = uint16_t;

inline constexpr std::array<Tt4, 4> kTt4Vars = {0xAAAA, 0xCCCC, 0xF0F0, 0xFF00};

struct NpnTransform {
  std::array<uint8_t, 4> perm = {0, 1, 2, 3};
  uint8_t input_neg = 0;
  bool output_neg = false;

  bool operator==(const NpnTransform&) const = default;
};

/// Minterm index map x -> y for the input part of t.
inline std::array<uint8_t, 16> npn_minterm_map(const NpnTransform& t) {
  std::array<uint8_t, 16> y{};
  for (unsigned x = 0; x < 16; ++x) {
    unsigned v = 0;
    for (unsigned i = 0; i < 4; ++i) v |= (((x >> t.perm[i]) ^ (t.input_neg >> i)) & 1u) << i;
    y[x] = static_cast<uint8_t>(v);
  }
  return y;
}

inline Tt4 apply_npn(Tt4 f, const std::array<uint8_t, 16>& map, bool output_neg) {
  unsigned g = 0;
  for (unsigned x = 0; x < 16; ++x) g |= ((f >> map[x]) & 1u) << x;
  return static_cast<Tt4>(output_neg ? ~g : g);
}

inline Tt4 apply_npn(Tt4 f, const NpnTransform& t) { return apply_npn(f, npn_minterm_map(t), t.output_neg); }

/// All 24 * 16 input transforms (output polarity left false).
inline std::vector<NpnTransform> input_np_transforms() {
  std::vector<NpnTransform> out;
  std::array<uint8_t, 4> perm = {0, 1, 2, 3};
  do {
    for (uint8_t neg = 0; neg < 16; ++neg) out.push_back({perm, neg, false});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// Canonical representative and transform for all 65536 functions.
class NpnTable {
 public:
  NpnTable() : canon_(65536, 0), transform_(65536), assigned_(65536, 0) {
    const auto inputs = input_np_transforms();
    std::vector<std::array<uint8_t, 16>> maps;
    maps.reserve(inputs.size());
    for (const auto& t : inputs) maps.push_back(npn_minterm_map(t));
    for (uint32_t f = 0; f < 65536; ++f) {
      if (assigned_[f]) continue;
      const auto rep = static_cast<Tt4>(f);
      classes_.push_back(rep);
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (bool out_neg : {false, true}) {
          const Tt4 g = apply_npn(rep, maps[k], out_neg);
          if (assigned_[g]) continue;
          assigned_[g] = 1;
          canon_[g] = rep;
          transform_[g] = inputs[k];
          transform_[g].output_neg = out_neg;
        }
      }
    }
    assigned_.clear();
    assigned_.shrink_to_fit();
    class_index_.assign(65536, 0);
    for (uint32_t i = 0; i < classes_.size(); ++i) class_index_[classes_[i]] = i;
  }

  Tt4 canonical(Tt4 f) const { return canon_[f]; }
  /// f == apply_npn(canonical(f), transform(f)).
  const NpnTransform& transform(Tt4 f) const { return transform_[f]; }
  uint32_t class_index(Tt4 f) const { return class_index_[canon_[f]]; }
  const std::vector<Tt4>& classes() const { return classes_; }

 private:
  std::vector<Tt4> canon_;
  std::vector<NpnTransform> transform_;
  std::vector<uint8_t> assigned_;
  std::vector<uint32_t> class_index_;
  std::vector<Tt4> classes_;
};

inline const NpnTable& npn_table() {
  static const NpnTable table;
  return table;
}

inline Tt4 npn_canonical(Tt4 f) { return npn_table().canonical(f); }

}  // namespace abcrl
