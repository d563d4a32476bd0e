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
  \file actions.hpp
  \brief The seven synthesis actions, recipes and the synthesis function.
*/

#pragma once

#include "aig.hpp"
#include "balance.hpp"
#include "errors.hpp"
#include "refactor.hpp"
#include "resub.hpp"
#include "rewrite.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abcrl {

enum class Action : uint8_t {
  balance = 0,
  rewrite = 1,
  rewrite_z = 2,
  refactor = 3,
  refactor_z = 4,
  resub = 5,
  resub_z = 6,
};

inline constexpr uint32_t kNumActions = 7;
inline constexpr uint32_t kDefaultRecipeLength = 10;
inline constexpr std::array<std::string_view, kNumActions> kActionMnemonics = {"b", "rw", "rw-z", "rf", "rf-z", "rs", "rs-z"};

inline constexpr uint32_t action_id(Action a) { return static_cast<uint32_t>(a); }
inline constexpr std::string_view mnemonic(Action a) { return kActionMnemonics[action_id(a)]; }

inline Action action_from_id(uint32_t id) {
  if (id >= kNumActions) throw std::out_of_range("action id " + std::to_string(id));
  return static_cast<Action>(id);
}

inline Action parse_action(std::string_view s) {
  for (uint32_t i = 0; i < kNumActions; ++i) {
    if (kActionMnemonics[i] == s) return static_cast<Action>(i);
  }
  throw ConfigError("unknown action '" + std::string(s) + "'");
}

/// Action sequence bounded by a maximum length.
class Recipe {
 public:
  explicit Recipe(uint32_t max_length = kDefaultRecipeLength) : max_length_(max_length) {}
  Recipe(std::vector<Action> actions, uint32_t max_length) : max_length_(max_length) {
    for (auto a : actions) push(a);
  }

  static Recipe parse(std::string_view text, uint32_t max_length = kDefaultRecipeLength) {
    Recipe r(max_length);
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t end = std::min(text.find(';', pos), text.size());
      std::string_view tok = text.substr(pos, end - pos);
      while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
      while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\n' || tok.back() == '\r')) tok.remove_suffix(1);
      if (!tok.empty()) {
        if (r.size() >= max_length) throw ConfigError("recipe longer than " + std::to_string(max_length) + " actions");
        r.push(parse_action(tok));
      } else if (end < text.size()) {
        throw ConfigError("empty action in recipe '" + std::string(text) + "'");
      }
      pos = end + 1;
    }
    return r;
  }

  void push(Action a) {
    if (actions_.size() >= max_length_) throw std::length_error("recipe longer than " + std::to_string(max_length_) + " actions");
    actions_.push_back(a);
  }

  uint32_t size() const { return static_cast<uint32_t>(actions_.size()); }
  bool empty() const { return actions_.empty(); }
  uint32_t max_length() const { return max_length_; }
  bool full() const { return size() == max_length_; }
  const std::vector<Action>& actions() const { return actions_; }
  Action operator[](std::size_t i) const { return actions_[i]; }

  Recipe prefix(uint32_t n) const {
    Recipe r(max_length_);
    for (uint32_t i = 0; i < n && i < size(); ++i) r.push(actions_[i]);
    return r;
  }

  Recipe with(Action a) const {
    Recipe r = *this;
    r.push(a);
    return r;
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < actions_.size(); ++i) {
      if (i) s += "; ";
      s += mnemonic(actions_[i]);
    }
    return s;
  }

  bool operator==(const Recipe& o) const { return actions_ == o.actions_; }

 private:
  uint32_t max_length_;
  std::vector<Action> actions_;
};

/// resyn2 as the usual ten-step script.
inline Recipe resyn2() {
  return Recipe::parse("b; rw; rf; b; rw; rw-z; b; rf-z; rw-z; b", 10);
}

struct TransformParams {
  const RewriteLibrary* library = nullptr;  // default library when null
  uint32_t cut_limit = 8;
  uint32_t refactor_leaves = 10;
  uint32_t resub_depth = 4;
  uint32_t resub_leaves = 10;
};

inline Aig apply_action(const Aig& g, Action a, const TransformParams& p = {}) {
  const RewriteLibrary& lib = p.library ? *p.library : default_rewrite_library();
  switch (a) {
    case Action::balance:
      return balance(g);
    case Action::rewrite:
    case Action::rewrite_z: {
      Network net(g);
      rewrite_network(net, lib, RewriteParams{a == Action::rewrite_z, p.cut_limit});
      return net.to_aig();
    }
    case Action::refactor:
    case Action::refactor_z: {
      Network net(g);
      refactor_network(net, RefactorParams{a == Action::refactor_z, p.refactor_leaves});
      return net.to_aig();
    }
    case Action::resub:
    case Action::resub_z: {
      Network net(g);
      ResubParams rp;
      rp.zero_cost = a == Action::resub_z;
      rp.window_depth = p.resub_depth;
      rp.max_leaves = p.resub_leaves;
      resub_network(net, rp);
      return net.to_aig();
    }
  }
  throw std::logic_error("unhandled action");
}

struct RecipeResult {
  Aig aig;
  std::vector<AigStats> trace;  // G_0 .. G_n
};

inline RecipeResult apply_recipe(const Aig& g0, const Recipe& r, const TransformParams& p = {}) {
  RecipeResult out{g0, {stats(g0)}};
  for (auto a : r.actions()) {
    out.aig = apply_action(out.aig, a, p);
    out.trace.push_back(stats(out.aig));
  }
  return out;
}

}  // namespace abcrl
