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

#include "abcrl/actions.hpp"
#include "abcrl/generators.hpp"
#include "abcrl/network.hpp"
#include "abcrl/rewrite_library.hpp"
#include "abcrl/simulation.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <functional>

using namespace abcrl;

namespace {

bool equivalent(const Aig& a, const Aig& b) { return check_equivalence_auto(a, b, 16).equivalent; }

Aig chain4() {
  AigBuilder b(4);
  b.add_output(b.and_(b.and_(b.and_(b.pi(0), b.pi(1)), b.pi(2)), b.pi(3)));
  return std::move(b).build();
}

}  // namespace

TEST(Actions, IdsAndMnemonics) {
  EXPECT_EQ(kNumActions, 7u);
  for (uint32_t i = 0; i < kNumActions; ++i) {
    EXPECT_EQ(action_id(action_from_id(i)), i);
    EXPECT_EQ(parse_action(mnemonic(action_from_id(i))), action_from_id(i));
  }
  EXPECT_THROW(parse_action("rm"), ConfigError);
  EXPECT_THROW(action_from_id(7), std::out_of_range);
}

TEST(Recipe, ParseFormatAndBound) {
  const Recipe r = resyn2();
  EXPECT_EQ(r.size(), 10u);
  EXPECT_EQ(r.str(), "b; rw; rf; b; rw; rw-z; b; rf-z; rw-z; b");
  EXPECT_EQ(Recipe::parse(r.str()), r);
  EXPECT_TRUE(Recipe::parse("").empty());
  EXPECT_THROW(Recipe::parse("b; b; b", 2), ConfigError);
  EXPECT_THROW(Recipe::parse("b;;rw"), ConfigError);
  Recipe full = Recipe::parse("b", 1);
  EXPECT_THROW(full.push(Action::rewrite), std::length_error);
  EXPECT_EQ(r.prefix(3).str(), "b; rw; rf");
}

TEST(Library, KnownClassesAndSoundness) {
  const RewriteLibrary& lib = default_rewrite_library();
  const NpnTable& t = npn_table();
  const auto* wire = lib.find(t.canonical(kTt4Vars[0]));
  ASSERT_NE(wire, nullptr);
  EXPECT_EQ(wire->size(), 0u);
  const Tt4 and4 = kTt4Vars[0] & kTt4Vars[1] & kTt4Vars[2] & kTt4Vars[3];
  const auto* a4 = lib.find(t.canonical(and4));
  ASSERT_NE(a4, nullptr);
  EXPECT_EQ(a4->size(), 3u);
  EXPECT_EQ(lib.coverage(), 136u);
  EXPECT_EQ(lib.uncovered().size(), 222u - 136u);
  for (Tt4 c : t.classes()) {
    if (const auto* s = lib.find(c)) { EXPECT_EQ(s->evaluate(), c); }
  }
}

TEST(Library, SmallBoundIsMinimal) {
  // Exact minimum sizes: a structure of n nodes exists only when no smaller one does.
  const RewriteLibrary l3 = build_rewrite_library(3);
  const RewriteLibrary& l7 = default_rewrite_library();
  for (std::size_t i = 0; i < l3.structures().size(); ++i) {
    if (l3.structures()[i]) {
      ASSERT_TRUE(l7.structures()[i].has_value());
      EXPECT_EQ(l3.structures()[i]->size(), l7.structures()[i]->size());
    }
  }
}

TEST(Library, SaveLoadRoundTrip) {
  const RewriteLibrary& lib = default_rewrite_library();
  const auto path = std::filesystem::temp_directory_path() / "abcrl_test_lib.bin";
  lib.save(path);
  const RewriteLibrary back = RewriteLibrary::load(path);
  EXPECT_EQ(back.coverage(), lib.coverage());
  EXPECT_EQ(back.structures(), lib.structures());
  std::filesystem::remove(path);
}

TEST(Library, MissingLibraryIsConfigError) {
  const RewriteLibrary none;
  EXPECT_THROW(rewrite(chain4(), false, none), ConfigError);
}

TEST(Cuts, TruthTablesMatchCone) {
  for (uint64_t s = 1; s <= 20; ++s) {
    const Aig g = oracle::small_random(s);
    Network net(g);
    CutManager cm(net);
    for (uint32_t n = g.first_and(); n < net.size(); ++n) {
      if (!net.alive(n)) continue;
      for (const Cut& c : cm.cuts(n)) {
        std::function<bool(uint32_t, unsigned)> eval = [&](uint32_t x, unsigned m) -> bool {
          for (uint8_t i = 0; i < c.size; ++i) {
            if (c.leaves[i] == x) return (m >> i) & 1u;
          }
          EXPECT_TRUE(net.is_and(x)) << "cut is not complete";
          if (!net.is_and(x)) return false;
          const Literal a = net.fanin0(x), b = net.fanin1(x);
          return (eval(a.node(), m) != a.complemented()) && (eval(b.node(), m) != b.complemented());
        };
        for (unsigned m = 0; m < 16; ++m) {
          if (m >> c.size) continue;
          ASSERT_EQ(((c.tt >> m) & 1u) != 0, eval(n, m)) << "seed " << s << " node " << n;
        }
      }
    }
  }
}

TEST(Balance, Examples) {
  const Aig b = balance(chain4());
  EXPECT_EQ(stats(b).num_levels, 2u);
  EXPECT_EQ(stats(b).num_nodes, 3u);
  EXPECT_TRUE(equivalent(b, chain4()));

  AigBuilder one(2);
  one.add_output(one.and_(one.pi(0), one.pi(1)));
  const Aig g = std::move(one).build();
  EXPECT_TRUE(balance(g).structurally_equal(g));
}

TEST(Balance, IdempotentOnStats) {
  for (uint64_t s = 1; s <= 100; ++s) {
    const Aig once = balance(oracle::small_random(s));
    EXPECT_EQ(stats(balance(once)), stats(once)) << "seed " << s;
  }
}

TEST(Rewrite, Absorption) {
  AigBuilder b(2);
  const Literal x = b.pi(0), y = b.pi(1);
  b.add_output(b.and_(x, b.and_(x, y)));
  const Aig g = std::move(b).build();
  ASSERT_EQ(g.num_ands(), 2u);
  const Aig r = rewrite(g);
  EXPECT_EQ(r.num_ands(), 1u);
  EXPECT_TRUE(equivalent(g, r));
}

TEST(Rewrite, MinimalCircuitUnchanged) {
  AigBuilder b(4);
  b.add_output(b.and_(b.and_(b.pi(0), b.pi(1)), b.and_(b.pi(2), b.pi(3))));
  const Aig g = std::move(b).build();
  EXPECT_EQ(rewrite(g).num_ands(), 3u);
}

TEST(Refactor, SharedLiteralFactored) {
  // a*b + a*c: three nodes as built, a*(b+c) needs two.
  AigBuilder b(3);
  const Literal a = b.pi(0), x = b.pi(1), y = b.pi(2);
  b.add_output(b.or_(b.and_(a, x), b.and_(a, y)));
  const Aig g = std::move(b).build();
  ASSERT_EQ(g.num_ands(), 3u);
  const Aig r = refactor(g);
  EXPECT_EQ(r.num_ands(), 2u);
  EXPECT_TRUE(equivalent(g, r));
}

TEST(Refactor, WireCircuitUnchanged) {
  AigBuilder b(3);
  b.add_output(b.pi(0));
  b.add_output(!b.pi(2));
  const Aig g = std::move(b).build();
  EXPECT_TRUE(refactor(g).structurally_equal(g));
}

TEST(Resub, DuplicateConeMerged) {
  // Two structurally different XORs of the same inputs feed one AND.
  AigBuilder b(2);
  const Literal x = b.pi(0), y = b.pi(1);
  const Literal x1 = b.or_(b.and_(x, !y), b.and_(!x, y));
  const Literal x2 = !b.or_(b.and_(x, y), b.and_(!x, !y));
  b.add_output(x1);
  b.add_output(x2);
  const Aig g = std::move(b).build();
  ASSERT_EQ(g.num_ands(), 6u);
  const Aig r = resub(g);
  EXPECT_EQ(r.num_ands(), 3u);
  EXPECT_TRUE(equivalent(g, r));
}

TEST(Resub, DistinctFunctionsUnchanged) {
  AigBuilder b(4);
  b.add_output(b.and_(b.pi(0), b.pi(1)));
  b.add_output(b.and_(b.pi(2), b.pi(3)));
  const Aig g = std::move(b).build();
  EXPECT_TRUE(resub(g).structurally_equal(g));
}

TEST(Transforms, SoundAndMonotoneOnCorpus) {
  for (uint64_t s = 1; s <= 100; ++s) {
    const Aig g = s % 2 ? oracle::small_random(s) : oracle::small_gates(s);
    const AigStats st = stats(g);
    for (uint32_t a = 0; a < kNumActions; ++a) {
      const Action act = action_from_id(a);
      const Aig h = apply_action(g, act);
      ASSERT_TRUE(check_equivalence(g, h).equivalent) << "seed " << s << " " << mnemonic(act);
      const AigStats sh = stats(h);
      if (act == Action::rewrite || act == Action::refactor || act == Action::resub) { EXPECT_LE(sh.num_nodes, st.num_nodes); }
      if (act == Action::balance) { EXPECT_LE(sh.num_levels, st.num_levels); }
    }
  }
}

TEST(Transforms, DispatchAndDeterminism) {
  const Aig g = oracle::small_gates(11, 10, 60);
  EXPECT_TRUE(apply_action(g, Action::balance).structurally_equal(balance(g)));
  for (uint32_t a = 0; a < kNumActions; ++a) {
    EXPECT_TRUE(apply_action(g, action_from_id(a)).structurally_equal(apply_action(g, action_from_id(a))));
  }
}

TEST(ApplyRecipe, EmptyAndPrefix) {
  const Aig g = oracle::small_gates(3, 10, 50);
  const auto e = apply_recipe(g, Recipe{});
  EXPECT_EQ(e.trace.size(), 1u);
  EXPECT_TRUE(e.aig.structurally_equal(g));
  const Recipe r = resyn2();
  const auto full = apply_recipe(g, r);
  EXPECT_EQ(full.trace.size(), 11u);
  EXPECT_TRUE(equivalent(g, full.aig));
  EXPECT_LE(full.trace.back().num_nodes, full.trace.front().num_nodes);
  for (uint32_t j = 0; j <= r.size(); ++j) {
    const auto part = apply_recipe(g, r.prefix(j));
    for (uint32_t k = 0; k <= j; ++k) EXPECT_EQ(part.trace[k], full.trace[k]);
  }
}

TEST(ApplyRecipe, ArithmeticDesigns) {
  for (const Aig& g : {ripple_adder(6), array_multiplier(4)}) {
    const auto r = apply_recipe(g, resyn2());
    EXPECT_TRUE(equivalent(g, r.aig));
    EXPECT_LE(r.trace.back().num_nodes, r.trace.front().num_nodes);
  }
}
