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
  \file rewrite_library.hpp
  \brief Minimum-size AIG structures for the NPN classes of 4-input functions.

  The library is computed by exhaustive enumeration: every multi-output AIG
  with n AND nodes over 4 inputs is represented by the set of functions its
  nodes compute, and sets are deduplicated up to input negation/permutation.
  Enumerating n = 1, 2, ... in order yields, for every class reachable within
  the bound, a structure with the minimum number of AND nodes (ties resolved
  towards smaller depth, then first found).
*/

#pragma once

#include "aig.hpp"
#include "binary_io.hpp"
#include "errors.hpp"
#include "npn.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace abcrl {

/// AND structure over 4 inputs. Literal encoding: 2*index + complement, where
/// index 0 is constant FALSE, 1..4 the inputs and 5+j the j-th node.
struct LibraryStructure {
  std::vector<std::pair<uint8_t, uint8_t>> nodes;
  uint8_t output = 0;
  uint8_t depth = 0;

  uint32_t size() const { return static_cast<uint32_t>(nodes.size()); }

  Tt4 evaluate() const {
    std::vector<Tt4> value = {0, kTt4Vars[0], kTt4Vars[1], kTt4Vars[2], kTt4Vars[3]};
    auto lit = [&](uint8_t l) { return static_cast<Tt4>((l & 1u) ? ~value[l >> 1] : value[l >> 1]); };
    for (auto [a, b] : nodes) value.push_back(static_cast<Tt4>(lit(a) & lit(b)));
    return lit(output);
  }

  bool operator==(const LibraryStructure&) const = default;
};

/// Builds `s` on top of `inputs` with any builder exposing and_(Literal, Literal).
template <class Builder>
Literal instantiate(const LibraryStructure& s, const std::array<Literal, 4>& inputs, Builder& builder) {
  std::vector<Literal> value = {kFalse, inputs[0], inputs[1], inputs[2], inputs[3]};
  auto lit = [&](uint8_t l) { return value[l >> 1] ^ static_cast<bool>(l & 1u); };
  for (auto [a, b] : s.nodes) value.push_back(builder.and_(lit(a), lit(b)));
  return lit(s.output);
}

class RewriteLibrary {
 public:
  static constexpr uint32_t kFormatVersion = 1;

  RewriteLibrary() = default;
  explicit RewriteLibrary(uint32_t max_nodes)
      : max_nodes_(max_nodes), structures_(npn_table().classes().size()), built_(true) {}

  bool empty() const { return !built_; }
  uint32_t max_nodes() const { return max_nodes_; }

  /// Structure implementing the canonical representative `canonical`.
  const LibraryStructure* find(Tt4 canonical) const {
    const auto& s = structures_[npn_table().class_index(canonical)];
    return s ? &*s : nullptr;
  }

  const std::vector<std::optional<LibraryStructure>>& structures() const { return structures_; }

  uint32_t coverage() const {
    return static_cast<uint32_t>(std::count_if(structures_.begin(), structures_.end(), [](const auto& s) { return s.has_value(); }));
  }

  std::vector<Tt4> uncovered() const {
    std::vector<Tt4> out;
    for (std::size_t i = 0; i < structures_.size(); ++i) {
      if (!structures_[i]) out.push_back(npn_table().classes()[i]);
    }
    return out;
  }

  void set(uint32_t class_index, LibraryStructure s) { structures_[class_index] = std::move(s); }

  void save(const std::filesystem::path& path) const {
    BinaryWriter w;
    w.magic("ABCRLLIB");
    w.u32(kFormatVersion);
    w.u32(max_nodes_);
    w.u32(static_cast<uint32_t>(structures_.size()));
    // Coverage manifest.
    const auto missing = uncovered();
    w.u32(coverage());
    w.u32(static_cast<uint32_t>(missing.size()));
    for (auto f : missing) w.u16(f);
    for (std::size_t i = 0; i < structures_.size(); ++i) {
      w.u16(npn_table().classes()[i]);
      w.u8(structures_[i] ? 1 : 0);
      if (!structures_[i]) continue;
      const auto& s = *structures_[i];
      w.u8(static_cast<uint8_t>(s.nodes.size()));
      w.u8(s.depth);
      for (auto [a, b] : s.nodes) {
        w.u8(a);
        w.u8(b);
      }
      w.u8(s.output);
    }
    w.save(path);
  }

  static RewriteLibrary load(const std::filesystem::path& path) {
    auto r = BinaryReader::from_file(path);
    r.expect_magic("ABCRLLIB");
    if (r.u32() != kFormatVersion) throw InputError(path.string() + ": unsupported rewrite library version");
    RewriteLibrary lib(r.u32());
    if (r.u32() != npn_table().classes().size()) throw InputError(path.string() + ": class count mismatch");
    const uint32_t covered = r.u32();
    const uint32_t missing = r.u32();
    std::vector<Tt4> missing_list;
    for (uint32_t i = 0; i < missing; ++i) missing_list.push_back(r.u16());
    for (std::size_t i = 0; i < lib.structures_.size(); ++i) {
      const Tt4 rep = r.u16();
      if (rep != npn_table().classes()[i]) throw InputError(path.string() + ": class order mismatch");
      if (!r.u8()) continue;
      LibraryStructure s;
      const uint8_t n = r.u8();
      s.depth = r.u8();
      for (uint8_t k = 0; k < n; ++k) {
        const uint8_t a = r.u8();
        const uint8_t b = r.u8();
        s.nodes.emplace_back(a, b);
      }
      s.output = r.u8();
      if (s.evaluate() != rep) throw InputError(path.string() + ": structure does not implement its class");
      lib.structures_[i] = std::move(s);
    }
    if (lib.coverage() != covered || lib.uncovered() != missing_list) {
      throw InputError(path.string() + ": coverage manifest does not match the stored structures");
    }
    return lib;
  }

 private:
  uint32_t max_nodes_ = 0;
  std::vector<std::optional<LibraryStructure>> structures_;
  bool built_ = false;
};

namespace detail {

struct EnumCircuit {
  std::vector<std::pair<uint8_t, uint8_t>> nodes;
  std::vector<Tt4> funcs;  // function of each node (positive polarity)
  std::vector<uint8_t> depth;
};

inline Tt4 phase_normal(Tt4 f) { return (f & 1u) ? static_cast<Tt4>(~f) : f; }

struct SetKey {
  uint64_t lo = 0, hi = 0;
  bool operator==(const SetKey&) const = default;
};
struct SetKeyHash {
  std::size_t operator()(const SetKey& k) const { return k.lo * 0x9E3779B97F4A7C15ull ^ (k.hi + (k.lo >> 7)); }
};

inline SetKey pack_sorted(std::array<Tt4, 8>& v, std::size_t n) {
  std::sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
  SetKey k;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < 4) {
      k.lo |= uint64_t{v[i]} << (16 * i);
    } else {
      k.hi |= uint64_t{v[i]} << (16 * (i - 4));
    }
  }
  return k;
}

inline bool key_less(const SetKey& a, const SetKey& b) { return a.hi != b.hi ? a.hi < b.hi : a.lo < b.lo; }

/// Relabels a structure computing g so that it computes `target` (same class).
inline std::optional<LibraryStructure> retarget(const LibraryStructure& s, Tt4 g, Tt4 target) {
  for (const auto& t : input_np_transforms()) {
    const auto map = npn_minterm_map(t);
    for (bool out_neg : {false, true}) {
      if (apply_npn(g, map, out_neg) != target) continue;
      // Input i of s receives w_{perm[i]} ^ neg_i.
      auto relabel = [&](uint8_t l) -> uint8_t {
        const uint8_t idx = l >> 1;
        if (idx == 0 || idx > 4) return l;
        const uint8_t i = idx - 1;
        const uint8_t c = static_cast<uint8_t>((l & 1u) ^ ((t.input_neg >> i) & 1u));
        return static_cast<uint8_t>(2 * (1 + t.perm[i]) + c);
      };
      LibraryStructure out;
      out.depth = s.depth;
      for (auto [a, b] : s.nodes) out.nodes.emplace_back(relabel(a), relabel(b));
      out.output = static_cast<uint8_t>(relabel(s.output) ^ (out_neg ? 1u : 0u));
      if (out.evaluate() == target) return out;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Exhaustive minimum-size enumeration up to `max_nodes` AND nodes (<= 7).
inline RewriteLibrary build_rewrite_library(uint32_t max_nodes = 7) {
  if (max_nodes > 7) throw std::invalid_argument("rewrite library node bound must be at most 7");
  const auto& npn = npn_table();
  RewriteLibrary lib(max_nodes);
  std::vector<uint32_t> best_size(npn.classes().size(), ~0u);
  std::vector<uint32_t> best_depth(npn.classes().size(), ~0u);

  auto record = [&](const detail::EnumCircuit& c, uint8_t out_lit, Tt4 g, uint32_t size, uint32_t depth) {
    const uint32_t cls = npn.class_index(g);
    if (best_size[cls] < size || (best_size[cls] == size && best_depth[cls] <= depth)) return;
    LibraryStructure s;
    s.nodes = c.nodes;
    s.output = out_lit;
    s.depth = static_cast<uint8_t>(depth);
    auto fitted = detail::retarget(s, g, npn.classes()[cls]);
    if (!fitted) throw std::logic_error("rewrite library: failed to map structure onto class representative");
    best_size[cls] = size;
    best_depth[cls] = depth;
    lib.set(cls, std::move(*fitted));
  };

  // Zero-node functions: constant and projections.
  detail::EnumCircuit empty;
  record(empty, 0, 0, 0, 0);
  for (uint8_t i = 0; i < 4; ++i) record(empty, static_cast<uint8_t>(2 * (1 + i)), kTt4Vars[i], 0, 0);
  if (max_nodes == 0) return lib;

  // Input negation/permutation tables used to canonize function sets.
  const auto transforms = input_np_transforms();
  std::vector<std::vector<Tt4>> tables;
  if (max_nodes >= 3) {
    tables.reserve(transforms.size());
    for (const auto& t : transforms) {
      const auto map = npn_minterm_map(t);
      std::vector<Tt4> tab(65536);
      for (uint32_t f = 0; f < 65536; ++f) tab[f] = apply_npn(static_cast<Tt4>(f), map, false);
      tables.push_back(std::move(tab));
    }
  }
  auto canonical_key = [&](const detail::EnumCircuit& c) {
    std::array<Tt4, 8> v{};
    detail::SetKey best;
    bool first = true;
    for (const auto& tab : tables) {
      for (std::size_t i = 0; i < c.funcs.size(); ++i) v[i] = detail::phase_normal(tab[c.funcs[i]]);
      const auto k = detail::pack_sorted(v, c.funcs.size());
      if (first || detail::key_less(k, best)) best = k;
      first = false;
    }
    return best;
  };

  // Calls f(child) for every one-node extension adding a new function.
  auto extend = [](const detail::EnumCircuit& c, auto&& f) {
    std::array<Tt4, 12> sig{};
    std::array<uint8_t, 12> lit{};
    std::array<uint8_t, 12> dep{};
    std::size_t k = 0;
    for (uint8_t i = 0; i < 4; ++i, ++k) {
      sig[k] = kTt4Vars[i];
      lit[k] = static_cast<uint8_t>(2 * (1 + i));
      dep[k] = 0;
    }
    for (std::size_t j = 0; j < c.funcs.size(); ++j, ++k) {
      sig[k] = c.funcs[j];
      lit[k] = static_cast<uint8_t>(2 * (5 + j));
      dep[k] = c.depth[j];
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        for (unsigned pol = 0; pol < 4; ++pol) {
          const Tt4 a = (pol & 1u) ? static_cast<Tt4>(~sig[i]) : sig[i];
          const Tt4 b = (pol & 2u) ? static_cast<Tt4>(~sig[j]) : sig[j];
          const Tt4 g = static_cast<Tt4>(a & b);
          const Tt4 gn = detail::phase_normal(g);
          if (gn == 0) continue;
          bool duplicate = false;
          for (std::size_t q = 0; q < k && !duplicate; ++q) duplicate = detail::phase_normal(sig[q]) == gn;
          if (duplicate) continue;
          f(static_cast<uint8_t>(lit[i] ^ (pol & 1u)), static_cast<uint8_t>(lit[j] ^ ((pol >> 1) & 1u)), g,
            static_cast<uint8_t>(1 + std::max(dep[i], dep[j])));
        }
      }
    }
  };

  std::vector<detail::EnumCircuit> frontier(1);
  for (uint32_t n = 1; n <= max_nodes; ++n) {
    std::vector<detail::EnumCircuit> next;
    std::unordered_set<detail::SetKey, detail::SetKeyHash> seen;
    const bool last = n == max_nodes;
    const bool penultimate = n + 1 == max_nodes;
    for (const auto& c : frontier) {
      extend(c, [&](uint8_t la, uint8_t lb, Tt4 g, uint8_t d) {
        detail::EnumCircuit child = c;
        child.nodes.emplace_back(la, lb);
        child.funcs.push_back(g);
        child.depth.push_back(d);
        const auto out = static_cast<uint8_t>(2 * (4 + child.nodes.size()));
        const uint32_t cls = npn.class_index(g);
        if (best_size[cls] >= n) record(child, out, g, n, d);
        if (last) return;
        if (penultimate) {
          // Last level: only report, no storage or deduplication.
          extend(child, [&](uint8_t la2, uint8_t lb2, Tt4 g2, uint8_t d2) {
            const uint32_t cls2 = npn.class_index(g2);
            if (best_size[cls2] < n + 1) return;
            if (best_size[cls2] == n + 1 && best_depth[cls2] <= d2) return;
            detail::EnumCircuit grand = child;
            grand.nodes.emplace_back(la2, lb2);
            grand.funcs.push_back(g2);
            grand.depth.push_back(d2);
            record(grand, static_cast<uint8_t>(2 * (4 + grand.nodes.size())), g2, n + 1, d2);
          });
          return;
        }
        if (seen.insert(canonical_key(child)).second) next.push_back(std::move(child));
      });
    }
    if (last || penultimate) break;
    frontier = std::move(next);
  }
  return lib;
}

/// Process-wide library: loaded from $ABCRL_REWRITE_LIBRARY when set, built otherwise.
inline const RewriteLibrary& default_rewrite_library() {
  static const RewriteLibrary lib = [] {
    if (const char* path = std::getenv("ABCRL_REWRITE_LIBRARY"); path && *path) return RewriteLibrary::load(path);
    return build_rewrite_library(7);
  }();
  return lib;
}

}  // namespace abcrl
