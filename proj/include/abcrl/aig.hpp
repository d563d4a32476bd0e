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
  \file aig.hpp
  \brief And-inverter graph value type, structural-hashing builder and metrics.

  Node numbering follows AIGER: node 0 is constant FALSE, nodes 1..I are the
  primary inputs and the AND nodes follow in topological order.
*/

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace abcrl {

/// Edge into a node, optionally complemented. Encoded as 2*node + complement.
class Literal {
 public:
  constexpr Literal() = default;
  constexpr Literal(uint32_t node, bool complemented) : raw_((node << 1) | (complemented ? 1u : 0u)) {}

  static constexpr Literal from_raw(uint32_t raw) {
    Literal l;
    l.raw_ = raw;
    return l;
  }
  static constexpr Literal constant(bool value) { return Literal(0, value); }

  constexpr uint32_t node() const { return raw_ >> 1; }
  constexpr bool complemented() const { return raw_ & 1u; }
  constexpr uint32_t raw() const { return raw_; }
  constexpr bool is_constant() const { return node() == 0; }
  constexpr Literal regular() const { return from_raw(raw_ & ~1u); }

  constexpr Literal operator!() const { return from_raw(raw_ ^ 1u); }
  constexpr Literal operator^(bool c) const { return from_raw(raw_ ^ (c ? 1u : 0u)); }

  constexpr auto operator<=>(const Literal&) const = default;

 private:
  uint32_t raw_ = 0;
};

inline constexpr Literal kFalse = Literal::constant(false);
inline constexpr Literal kTrue = Literal::constant(true);

struct AndNode {
  Literal fanin0;  // fanin0.raw() >= fanin1.raw()
  Literal fanin1;

  bool operator==(const AndNode&) const = default;
};

struct AigStats {
  uint32_t num_pis = 0;
  uint32_t num_pos = 0;
  uint32_t num_nodes = 0;
  uint32_t num_levels = 0;

  bool operator==(const AigStats&) const = default;
};

/// Constant and trivial-case folding shared by every AND constructor.
/// Returns the folded literal, or nothing when a real node is required.
inline std::optional<Literal> fold_and(Literal a, Literal b) {
  if (a == kFalse || b == kFalse) return kFalse;
  if (a == kTrue) return b;
  if (b == kTrue) return a;
  if (a == b) return a;
  if (a == !b) return kFalse;
  return std::nullopt;
}

inline uint64_t and_key(Literal a, Literal b) {
  if (a.raw() < b.raw()) std::swap(a, b);
  return (uint64_t{a.raw()} << 32) | b.raw();
}

/// Immutable combinational AIG.
class Aig {
 public:
  Aig() = default;

  /// Validates topological order and literal bounds; fan-in pairs are sorted.
  Aig(std::string name, uint32_t num_pis, std::vector<AndNode> ands, std::vector<Literal> outputs)
      : name_(std::move(name)), num_pis_(num_pis), ands_(std::move(ands)), outputs_(std::move(outputs)) {
    for (uint32_t i = 0; i < ands_.size(); ++i) {
      auto& n = ands_[i];
      const uint32_t self = first_and() + i;
      if (n.fanin0.node() >= self || n.fanin1.node() >= self) {
        throw std::invalid_argument("AND node " + std::to_string(self) + " is not in topological order");
      }
      if (n.fanin0.raw() < n.fanin1.raw()) std::swap(n.fanin0, n.fanin1);
    }
    for (auto o : outputs_) {
      if (o.node() >= size()) throw std::invalid_argument("output literal out of range");
    }
  }

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  uint32_t num_pis() const { return num_pis_; }
  uint32_t num_pos() const { return static_cast<uint32_t>(outputs_.size()); }
  uint32_t num_ands() const { return static_cast<uint32_t>(ands_.size()); }
  /// Total node count including the constant node.
  uint32_t size() const { return 1 + num_pis_ + num_ands(); }
  uint32_t first_and() const { return 1 + num_pis_; }

  bool is_constant(uint32_t n) const { return n == 0; }
  bool is_pi(uint32_t n) const { return n >= 1 && n <= num_pis_; }
  bool is_and(uint32_t n) const { return n >= first_and() && n < size(); }

  Literal pi(uint32_t i) const { return Literal(1 + i, false); }
  const AndNode& and_node(uint32_t n) const { return ands_[n - first_and()]; }
  Literal fanin0(uint32_t n) const { return and_node(n).fanin0; }
  Literal fanin1(uint32_t n) const { return and_node(n).fanin1; }

  const std::vector<AndNode>& ands() const { return ands_; }
  const std::vector<Literal>& outputs() const { return outputs_; }

  /// Same node order and literals; the name is ignored.
  bool structurally_equal(const Aig& other) const {
    return num_pis_ == other.num_pis_ && ands_ == other.ands_ && outputs_ == other.outputs_;
  }

 private:
  std::string name_;
  uint32_t num_pis_ = 0;
  std::vector<AndNode> ands_;
  std::vector<Literal> outputs_;
};

/// Single-owner builder with structural hashing.
class AigBuilder {
 public:
  explicit AigBuilder(uint32_t num_pis, std::string name = {}) : name_(std::move(name)), num_pis_(num_pis) {}

  uint32_t num_pis() const { return num_pis_; }
  uint32_t num_ands() const { return static_cast<uint32_t>(ands_.size()); }
  uint32_t size() const { return 1 + num_pis_ + num_ands(); }

  Literal pi(uint32_t i) const {
    if (i >= num_pis_) throw std::out_of_range("primary input index");
    return Literal(1 + i, false);
  }

  const AndNode& and_node(uint32_t n) const { return ands_[n - 1 - num_pis_]; }

  /// Returns an existing node when the pair is already hashed.
  std::optional<Literal> lookup(Literal a, Literal b) const {
    if (auto folded = fold_and(a, b)) return folded;
    auto it = table_.find(and_key(a, b));
    if (it == table_.end()) return std::nullopt;
    return Literal(it->second, false);
  }

  Literal and_(Literal a, Literal b) {
    check(a);
    check(b);
    if (auto folded = fold_and(a, b)) return *folded;
    const uint64_t key = and_key(a, b);
    if (auto it = table_.find(key); it != table_.end()) return Literal(it->second, false);
    if (a.raw() < b.raw()) std::swap(a, b);
    const uint32_t node = size();
    ands_.push_back({a, b});
    table_.emplace(key, node);
    return Literal(node, false);
  }

  Literal or_(Literal a, Literal b) { return !and_(!a, !b); }
  Literal xor_(Literal a, Literal b) { return or_(and_(a, !b), and_(!a, b)); }
  Literal mux(Literal sel, Literal then_lit, Literal else_lit) {
    return or_(and_(sel, then_lit), and_(!sel, else_lit));
  }

  void add_output(Literal l) {
    check(l);
    outputs_.push_back(l);
  }

  Aig build() && { return Aig(std::move(name_), num_pis_, std::move(ands_), std::move(outputs_)); }

 private:
  void check(Literal l) const {
    if (l.node() >= size()) throw std::out_of_range("literal references a node that does not exist");
  }

  std::string name_;
  uint32_t num_pis_;
  std::vector<AndNode> ands_;
  std::vector<Literal> outputs_;
  std::unordered_map<uint64_t, uint32_t> table_;
};

/// Level of every node (constant and PIs at level 0).
inline std::vector<uint32_t> node_levels(const Aig& g) {
  std::vector<uint32_t> level(g.size(), 0);
  for (uint32_t n = g.first_and(); n < g.size(); ++n) {
    level[n] = 1 + std::max(level[g.fanin0(n).node()], level[g.fanin1(n).node()]);
  }
  return level;
}

inline AigStats stats(const Aig& g) {
  AigStats s;
  s.num_pis = g.num_pis();
  s.num_pos = g.num_pos();
  s.num_nodes = g.num_ands();
  const auto level = node_levels(g);
  for (auto o : g.outputs()) s.num_levels = std::max(s.num_levels, level[o.node()]);
  return s;
}

/// Area-delay proxy nodes * levels (levels floored at 1).
inline double adp_proxy(const AigStats& s) {
  if (s.num_nodes == 0) throw std::invalid_argument("area-delay proxy of an AIG without AND nodes");
  return static_cast<double>(s.num_nodes) * std::max<uint32_t>(s.num_levels, 1);
}

/// QoR = 1 / (nodes * max(levels, 1)); larger is better.
inline double qor_proxy(const AigStats& s) { return 1.0 / adp_proxy(s); }
inline double qor_proxy(const Aig& g) { return qor_proxy(stats(g)); }

/// Rebuilds g with structural hashing, dropping nodes unreachable from outputs.
inline Aig strash(const Aig& g) {
  AigBuilder b(g.num_pis(), g.name());
  std::vector<char> used(g.size(), 0);
  for (auto o : g.outputs()) used[o.node()] = 1;
  for (uint32_t n = g.size(); n-- > g.first_and();) {
    if (!used[n]) continue;
    used[g.fanin0(n).node()] = 1;
    used[g.fanin1(n).node()] = 1;
  }
  std::vector<Literal> map(g.size());
  map[0] = kFalse;
  for (uint32_t i = 0; i < g.num_pis(); ++i) map[1 + i] = b.pi(i);
  auto remap = [&](Literal l) { return map[l.node()] ^ l.complemented(); };
  for (uint32_t n = g.first_and(); n < g.size(); ++n) {
    if (used[n]) map[n] = b.and_(remap(g.fanin0(n)), remap(g.fanin1(n)));
  }
  for (auto o : g.outputs()) b.add_output(remap(o));
  return std::move(b).build();
}

}  // namespace abcrl

template <>
struct std::hash<abcrl::Literal> {
  std::size_t operator()(abcrl::Literal l) const noexcept { return std::hash<uint32_t>{}(l.raw()); }
};
