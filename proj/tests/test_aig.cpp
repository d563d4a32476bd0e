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

#include "abcrl/aig.hpp"
#include "abcrl/aiger.hpp"
#include "abcrl/generators.hpp"
#include "abcrl/npn.hpp"
#include "abcrl/simulation.hpp"
#include "abcrl/truth_table.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

using namespace abcrl;
using abcrl::oracle::depth_oracle;
using abcrl::oracle::eval_naive;

namespace {

Aig and2() {
  AigBuilder b(2, "and2");
  b.add_output(b.and_(b.pi(0), b.pi(1)));
  return std::move(b).build();
}

Aig majority3() {
  AigBuilder b(3);
  const Literal a = b.pi(0), c = b.pi(1), d = b.pi(2);
  b.add_output(b.or_(b.or_(b.and_(a, c), b.and_(a, d)), b.and_(c, d)));
  return std::move(b).build();
}

}  // namespace

TEST(Literal, EncodingAndConstants) {
  EXPECT_EQ(kFalse.raw(), 0u);
  EXPECT_EQ(kTrue.raw(), 1u);
  const Literal l(5, true);
  EXPECT_EQ(l.node(), 5u);
  EXPECT_TRUE(l.complemented());
  EXPECT_EQ((!l).raw(), 10u);
  EXPECT_EQ(l.regular(), Literal(5, false));
}

TEST(Strash, Simplifications) {
  AigBuilder b(2);
  const Literal x = b.pi(0), y = b.pi(1);
  EXPECT_EQ(b.and_(x, kTrue), x);
  EXPECT_EQ(b.and_(x, kFalse), kFalse);
  EXPECT_EQ(b.and_(x, x), x);
  EXPECT_EQ(b.and_(x, !x), kFalse);
  EXPECT_EQ(b.num_ands(), 0u);
  const Literal p = b.and_(x, y);
  EXPECT_EQ(b.and_(y, x), p);
  EXPECT_EQ(b.num_ands(), 1u);
  const auto g = std::move(b).build();
  (void)g;
}

TEST(Strash, FaninsSortedAndUnique) {
  for (uint64_t s = 1; s <= 50; ++s) {
    const Aig g = oracle::small_random(s);
    std::set<std::pair<uint32_t, uint32_t>> seen;
    for (uint32_t n = g.first_and(); n < g.size(); ++n) {
      EXPECT_GE(g.fanin0(n).raw(), g.fanin1(n).raw());
      EXPECT_LT(g.fanin0(n).node(), n);
      EXPECT_TRUE(seen.insert({g.fanin0(n).raw(), g.fanin1(n).raw()}).second);
    }
  }
}

TEST(Strash, ConstructionOrderCanonical) {
  // Same function, operands supplied in permuted order: same node count.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<uint32_t> order(6);
    std::iota(order.begin(), order.end(), 0u);
    std::size_t count = 0;
    for (int rep = 0; rep < 2; ++rep) {
      std::shuffle(order.begin(), order.end(), rng);
      AigBuilder b(6);
      Literal acc = kTrue;
      for (auto i : order) acc = b.and_(acc, b.pi(i));
      Literal acc2 = kTrue;
      for (auto i : order) acc2 = b.and_(b.pi(i), acc2);
      b.add_output(acc);
      b.add_output(acc2);
      const Aig g = strash(std::move(b).build());
      if (rep == 0) count = g.num_ands();
      else EXPECT_EQ(g.num_ands(), count);
    }
  }
}

TEST(Aiger, WireOnly) {
  const Aig g = parse_aiger("aag 1 1 0 1 0\n2\n2\n");
  const AigStats s = stats(g);
  EXPECT_EQ(s.num_nodes, 0u);
  EXPECT_EQ(s.num_levels, 0u);
}

TEST(Aiger, SingleAnd) {
  const Aig g = parse_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n");
  EXPECT_EQ(stats(g), (AigStats{2, 1, 1, 1}));
  const Aig back = parse_aiger(write_aiger(g, AigerFormat::ascii));
  EXPECT_TRUE(back.structurally_equal(g));
  const Aig back2 = parse_aiger(write_aiger(g, AigerFormat::binary));
  EXPECT_TRUE(back2.structurally_equal(g));
}

TEST(Aiger, ErrorsNameOffsets) {
  EXPECT_THROW(parse_aiger("aag 1 1 1 0 0\n2\n2 3\n"), ParseError);  // latch
  EXPECT_THROW(parse_aiger("xyz 1 1 0 1 0\n"), ParseError);
  EXPECT_THROW(parse_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 8 2\n"), ParseError);  // dangling literal
  try {
    parse_aiger("aag 1 1 2 0 0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
}

TEST(Aiger, RoundTripThousandRandom) {
  for (uint64_t s = 1; s <= 1000; ++s) {
    RandomAigParams p;
    p.num_pis = 2 + s % 12;
    p.num_pos = 1 + s % 5;
    p.num_ands = 5 + (s * 13) % 120;
    p.seed = s;
    const Aig g = random_aig(p);
    for (auto f : {AigerFormat::ascii, AigerFormat::binary}) {
      const Aig h = parse_aiger(write_aiger(g, f));
      ASSERT_TRUE(h.structurally_equal(g)) << "seed " << s;
    }
  }
}

TEST(Aiger, BinaryAsciiBinaryByteIdentical) {
  RandomAigParams p;
  p.num_pis = 8;
  p.num_ands = 50;
  p.seed = 42;
  const Aig g = random_aig(p);
  const std::string bin = write_aiger(g, AigerFormat::binary);
  const std::string asc = write_aiger(parse_aiger(bin), AigerFormat::ascii);
  EXPECT_EQ(write_aiger(parse_aiger(asc), AigerFormat::binary), bin);
}

TEST(Simulate, Examples) {
  const std::vector<uint64_t> in = {0b1100, 0b1010};
  EXPECT_EQ(simulate(and2(), in)[0] & 0xF, 0b1000u);

  AigBuilder b(1);
  b.add_output(!b.pi(0));
  const Aig inv = std::move(b).build();
  const std::vector<uint64_t> a = {0b01};
  EXPECT_EQ(simulate(inv, a)[0] & 0b11, 0b10u);

  const std::vector<uint64_t> m = {0xAA, 0xCC, 0xF0};
  EXPECT_EQ(simulate(majority3(), m)[0] & 0xFF, 0b11101000u);
  EXPECT_THROW(simulate(and2(), a), std::invalid_argument);
}

TEST(Simulate, AgreesWithNaiveEvaluator) {
  for (uint64_t s = 1; s <= 40; ++s) {
    const Aig g = oracle::small_random(s, 12);
    const uint32_t n = g.num_pis();
    const uint64_t patterns = uint64_t{1} << n;
    for (uint64_t base = 0; base < patterns; base += 64) {
      std::vector<uint64_t> words(n, 0);
      for (uint64_t k = 0; k < 64 && base + k < patterns; ++k) {
        for (uint32_t i = 0; i < n; ++i) {
          if (((base + k) >> i) & 1) words[i] |= uint64_t{1} << k;
        }
      }
      const auto out = simulate(g, words);
      for (uint64_t k = 0; k < 64 && base + k < patterns; ++k) {
        std::vector<bool> in(n);
        for (uint32_t i = 0; i < n; ++i) in[i] = ((base + k) >> i) & 1;
        for (uint32_t o = 0; o < g.num_pos(); ++o) {
          ASSERT_EQ(((out[o] >> k) & 1) != 0, eval_naive(g, g.outputs()[o], in)) << "seed " << s;
        }
      }
    }
  }
}

TEST(Equivalence, Examples) {
  const Aig g = and2();
  EXPECT_TRUE(check_equivalence(g, g).equivalent);

  AigBuilder b(2);
  b.add_output(b.and_(b.pi(1), b.pi(0)));
  EXPECT_TRUE(check_equivalence(g, std::move(b).build()).equivalent);

  AigBuilder x(2), xn(2);
  x.add_output(x.xor_(x.pi(0), x.pi(1)));
  xn.add_output(!xn.xor_(xn.pi(0), xn.pi(1)));
  const auto r = check_equivalence(std::move(x).build(), std::move(xn).build());
  ASSERT_FALSE(r.equivalent);
  EXPECT_EQ(r.counterexample, (std::vector<bool>{false, false}));

  AigBuilder one(1);
  one.add_output(one.pi(0));
  EXPECT_THROW(check_equivalence(g, std::move(one).build()), std::invalid_argument);
}

TEST(Equivalence, CounterexampleDistinguishes) {
  for (uint64_t s = 1; s <= 30; ++s) {
    const Aig g = oracle::small_random(s);
    const Aig h = oracle::small_random(s + 1000);
    if (g.num_pis() != h.num_pis() || g.num_pos() != h.num_pos()) continue;
    const auto r = check_equivalence(g, h, RandomCheck{s, 4096});
    if (r.equivalent) continue;
    EXPECT_NE(eval_naive(g, g.outputs()[r.output], r.counterexample), eval_naive(h, h.outputs()[r.output], r.counterexample));
  }
}

TEST(Stats, Examples) {
  EXPECT_EQ(stats(and2()), (AigStats{2, 1, 1, 1}));
  AigBuilder b(4);
  b.add_output(b.and_(b.and_(b.pi(0), b.pi(1)), b.and_(b.pi(2), b.pi(3))));
  const AigStats s = stats(std::move(b).build());
  EXPECT_EQ(s.num_nodes, 3u);
  EXPECT_EQ(s.num_levels, 2u);
}

TEST(Stats, LevelsMatchOracle) {
  for (uint64_t s = 1; s <= 200; ++s) {
    const Aig g = oracle::small_random(s);
    const AigStats st = stats(g);
    EXPECT_EQ(st.num_levels, depth_oracle(g));
    EXPECT_LE(st.num_levels, st.num_nodes);
  }
}

TEST(QorProxy, Definition) {
  EXPECT_DOUBLE_EQ(qor_proxy(AigStats{7, 26, 174, 10}), 1.0 / 1740.0);
  EXPECT_DOUBLE_EQ(qor_proxy(and2()), 1.0);
  EXPECT_DOUBLE_EQ(qor_proxy(AigStats{0, 0, 50, 5}), 2.0 * qor_proxy(AigStats{0, 0, 100, 5}));
  EXPECT_THROW(qor_proxy(AigStats{1, 1, 0, 0}), std::invalid_argument);
}

TEST(TruthTable, CofactorAndSupport) {
  const auto a = TruthTable::nth_var(7, 0);
  const auto c = TruthTable::nth_var(7, 6);
  const auto f = a & c;
  EXPECT_EQ(f.support_size(), 2u);
  EXPECT_EQ(f.cofactor(6, true), a);
  EXPECT_TRUE(f.cofactor(6, false).is_const0());
  EXPECT_TRUE(f.implies(a));
  EXPECT_FALSE(a.implies(f));
}

TEST(Npn, MatchesBruteForceOracle) {
  const NpnTable& t = npn_table();
  std::unordered_map<uint16_t, uint16_t> canon_to_oracle;
  std::unordered_set<uint16_t> oracle_classes;
  for (uint32_t f = 0; f < 65536; ++f) {
    const auto tf = static_cast<Tt4>(f);
    const uint16_t o = oracle::npn_min_oracle(tf);
    oracle_classes.insert(o);
    auto [it, fresh] = canon_to_oracle.emplace(t.canonical(tf), o);
    ASSERT_EQ(it->second, o) << "function " << f;
    ASSERT_EQ(apply_npn(t.canonical(tf), t.transform(tf)), tf);
  }
  EXPECT_EQ(oracle_classes.size(), 222u);
  EXPECT_EQ(canon_to_oracle.size(), 222u);
  EXPECT_EQ(t.classes().size(), 222u);
}

TEST(Generators, Deterministic) {
  EXPECT_TRUE(oracle::small_random(5).structurally_equal(oracle::small_random(5)));
  EXPECT_TRUE(oracle::small_gates(5).structurally_equal(oracle::small_gates(5)));
  const Aig add = ripple_adder(4);
  for (uint32_t x = 0; x < 16; ++x) {
    for (uint32_t y = 0; y < 16; ++y) {
      std::vector<bool> in(8);
      for (int i = 0; i < 4; ++i) {
        in[i] = (x >> i) & 1;
        in[4 + i] = (y >> i) & 1;
      }
      uint32_t sum = 0;
      for (uint32_t o = 0; o < add.num_pos(); ++o) sum |= uint32_t{eval_naive(add, add.outputs()[o], in)} << o;
      ASSERT_EQ(sum, x + y);
    }
  }
}
