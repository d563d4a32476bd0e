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

#include "abcrl/policy.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

using namespace abcrl;

namespace {

GraphInput permuted(const GraphInput& in, const std::vector<int>& perm) {
  // Node i of the result is node perm[i] of the input.
  const auto n = static_cast<Eigen::Index>(perm.size());
  Eigen::PermutationMatrix<Eigen::Dynamic> P(n);
  for (Eigen::Index i = 0; i < n; ++i) P.indices()(perm[static_cast<std::size_t>(i)]) = static_cast<int>(i);
  GraphInput out;
  out.X = P * in.X;
  const MatrixXd dense = MatrixXd(in.A_hat);
  const MatrixXd pd = P * dense * P.transpose();
  out.A_hat = pd.sparseView();
  return out;
}

double max_rel_grad_error(PolicyParams& p, const std::vector<PolicySample>& batch, BnMode mode, std::string* worst_name) {
  PolicyParams grad(p.cfg);
  grad.set_zero();
  policy_loss(p, batch, mode, &grad);
  auto pt = p.tensors();
  auto gt = grad.tensors();
  double worst = 0.0;
  for (std::size_t t = 0; t < pt.size(); ++t) {
    MatrixXd& W = *pt[t].second;
    const MatrixXd& G = *gt[t].second;
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) {
        const double o = W(i, j);
        const double eps = 1e-5;
        W(i, j) = o + eps;
        const double lp = policy_loss(p, batch, mode);
        W(i, j) = o - eps;
        const double lm = policy_loss(p, batch, mode);
        W(i, j) = o;
        const double num = (lp - lm) / (2 * eps);
        const double rel = std::abs(num - G(i, j)) / std::max({std::abs(num), std::abs(G(i, j)), 1e-6});
        if (rel > worst) {
          worst = rel;
          if (worst_name) *worst_name = pt[t].first;
        }
      }
    }
  }
  return worst;
}

}  // namespace

TEST(Features, NodeTypesAndNegations) {
  AigBuilder b(2);
  const Literal x = b.pi(0), y = b.pi(1);
  const Literal inner = b.and_(!x, !y);
  b.add_output(b.and_(inner, x ^ false) ^ true);
  const GraphInput in = make_graph_input(std::move(b).build());
  ASSERT_EQ(in.num_nodes(), 4u);
  EXPECT_EQ(in.X(0, 0), 0.0);
  EXPECT_EQ(in.X(1, 0), 0.0);
  EXPECT_EQ(in.X(2, 0), 2.0);
  EXPECT_EQ(in.X(2, 1), 2.0);
  EXPECT_EQ(in.X(3, 0), 1.0);
  EXPECT_EQ(in.X(3, 1), 0.0);
  AigBuilder empty(0);
  empty.add_output(kTrue);
  EXPECT_THROW(make_graph_input(std::move(empty).build()), InputError);
}

TEST(Gcn, ZeroWeightsGiveZeroEmbedding) {
  PolicyConfig cfg;
  cfg.d = 16;
  const PolicyParams p(cfg);
  const RowVectorXd h = gcn_embed(p, make_graph_input(oracle::small_gates(1)));
  EXPECT_EQ(h.size(), 32);
  EXPECT_EQ(h.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gcn, PermutationInvariant) {
  PolicyConfig cfg;
  cfg.d = 16;
  PolicyParams p = init_policy(cfg, 11);
  const GraphInput in = make_graph_input(oracle::small_gates(2));
  std::vector<int> perm(in.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const GraphInput q = permuted(in, perm);
    EXPECT_LT((gcn_embed(p, in) - gcn_embed(p, q)).cwiseAbs().maxCoeff(), 1e-9);
    PolicyParams a = p, b = p;
    EXPECT_LT((gcn_forward(a, in, BnMode::train) - gcn_forward(b, q, BnMode::train)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Gcn, HandComputedTwoNodeGraph) {
  PolicyConfig cfg;
  cfg.d = 2;
  cfg.gcn_layers = 1;
  PolicyParams p(cfg);
  p.gcn_W[0] << 1.0, -1.0, 0.5, 2.0;
  p.gcn_b[0] << 0.1, -0.2;
  p.bn_mean[0] << 0.3, -0.1;
  p.bn_var[0] << 4.0, 0.25;
  p.bn_gamma[0] << 2.0, 1.0;
  p.bn_beta[0] << 0.0, 0.5;
  // Two nodes joined by one edge: degrees 2, A_hat = 1/2 everywhere.
  GraphInput in;
  in.X.resize(2, 2);
  in.X << 0.0, 1.0, 2.0, 0.0;
  MatrixXd A(2, 2);
  A << 0.5, 0.5, 0.5, 0.5;
  in.A_hat = A.sparseView();
  const RowVectorXd h = gcn_embed(p, in);
  // M = [[1, .5], [1, .5]]; Z = M W^T + b = [0.6, 1.3] for both rows.
  const double eps = cfg.bn_eps;
  const double y0 = 2.0 * (0.6 - 0.3) / std::sqrt(4.0 + eps);
  const double y1 = (1.3 + 0.1) / std::sqrt(0.25 + eps) + 0.5;
  ASSERT_EQ(h.size(), 4);
  EXPECT_NEAR(h(0), y0, 1e-12);
  EXPECT_NEAR(h(1), y1, 1e-12);
  EXPECT_NEAR(h(2), y0, 1e-12);
  EXPECT_NEAR(h(3), y1, 1e-12);
}

TEST(Recipe, EmbeddingProperties) {
  PolicyConfig cfg;
  cfg.d = 16;
  const PolicyParams p = init_policy(cfg, 3);
  EXPECT_EQ(recipe_embed(p, Recipe{}), recipe_embed(p, Recipe{}));
  const MatrixXd att = recipe_attention(p, Recipe::parse("b; rw; rs-z"));
  for (Eigen::Index i = 0; i < att.rows(); ++i) EXPECT_NEAR(att.row(i).sum(), 1.0, 1e-9);
  int differ = 0;
  for (uint64_t s = 0; s < 100; ++s) {
    const PolicyParams q = init_policy(cfg, 100 + s);
    if (recipe_embed(q, Recipe::parse("b; rw")) != recipe_embed(q, Recipe::parse("rw; b"))) ++differ;
  }
  EXPECT_GE(differ, 99);
}

TEST(Forward, UniformAndBoundedAtInit) {
  PolicyConfig cfg;
  cfg.d = 16;
  PolicyParams p = init_policy(cfg, 5);
  p.H2.setZero();
  p.c2.setZero();
  const Aig g = oracle::small_gates(3);
  for (double v : policy_forward(p, g, Recipe{})) EXPECT_EQ(v, 1.0 / 7.0);

  PolicyConfig full;  // d = 64
  for (uint64_t s = 0; s < 10; ++s) {
    const PolicyParams q = init_policy(full, s);
    for (const char* r : {"", "b", "rw; rf; rs", "b; b; b; b; b; b; b; b; b"}) {
      const ActionDist d = policy_forward(q, oracle::small_gates(s + 1), Recipe::parse(r));
      EXPECT_LE(*std::max_element(d.begin(), d.end()), 0.25);
      EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-12);
    }
  }
}

TEST(Forward, SoftmaxShiftInvariantAndDeterministic) {
  RowVectorXd l(7);
  l << 0.3, -1.0, 2.0, 0.0, 0.5, 0.1, -0.2;
  const ActionDist a = softmax_dist(l);
  const ActionDist b = softmax_dist((l.array() + 3.25).matrix());
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
  PolicyConfig cfg;
  cfg.d = 16;
  const PolicyParams p = init_policy(cfg, 8);
  const Aig g = oracle::small_gates(9);
  EXPECT_EQ(policy_forward(p, g, Recipe::parse("b")), policy_forward(p, g, Recipe::parse("b")));
}

TEST(Loss, Examples) {
  ActionDist onehot{};
  onehot[2] = 1.0;
  EXPECT_EQ(cross_entropy(onehot, onehot), 0.0);
  ActionDist u;
  u.fill(1.0 / 7.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    ActionDist t;
    double s = 0.0;
    for (auto& x : t) s += (x = static_cast<double>(rng() % 100));
    for (auto& x : t) x /= s;
    EXPECT_NEAR(cross_entropy(t, u), std::log(7.0), 1e-12);
    ActionDist q;
    double qs = 0.0;
    for (auto& x : q) qs += (x = 1.0 + static_cast<double>(rng() % 100));
    for (auto& x : q) x /= qs;
    double entropy = 0.0;
    for (double x : t) {
      if (x > 0) entropy -= x * std::log(x);
    }
    EXPECT_GE(cross_entropy(t, q), entropy - 1e-12);
  }
}

TEST(Gradients, MatchFiniteDifferences) {
  PolicyConfig cfg;
  cfg.d = 8;
  cfg.L = 4;
  PolicyParams p = init_policy(cfg, 3, 1.0);
  const GraphInput g1 = make_graph_input(oracle::small_gates(4, 5, 10));
  const GraphInput g2 = make_graph_input(oracle::small_gates(9, 5, 8));
  std::vector<PolicySample> batch;
  batch.push_back({&g1, Recipe::parse("b; rw", 4), {0.5, 0.2, 0.1, 0.1, 0.05, 0.05, 0.0}});
  batch.push_back({&g2, Recipe(4), {0, 0, 1, 0, 0, 0, 0}});
  batch.push_back({&g1, Recipe::parse("rs; rf-z; b", 4), {0.1, 0.1, 0.1, 0.1, 0.2, 0.2, 0.2}});
  std::string name;
  EXPECT_LT(max_rel_grad_error(p, batch, BnMode::train, &name), 1e-4) << name;
  std::mt19937_64 rng(2);
  for (auto& m : p.bn_mean) m.setRandom();
  for (auto& v : p.bn_var) v = v.array() + 2.0;
  EXPECT_LT(max_rel_grad_error(p, batch, BnMode::frozen, &name), 1e-4) << name;
}

TEST(Adam, ZeroLearningRateAndZeroGradient) {
  PolicyConfig cfg;
  cfg.d = 8;
  PolicyParams p = init_policy(cfg, 1);
  const GraphInput g = make_graph_input(oracle::small_gates(1));
  std::vector<PolicySample> batch = {{&g, Recipe{}, {0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1}}};
  const PolicyParams before = p;
  AdamState s = make_adam(p);
  grad_step(p, batch, s, 0.0, BnMode::frozen);
  grad_step(p, batch, s, 0.0, BnMode::frozen);
  EXPECT_TRUE(p == before);
  EXPECT_EQ(s.t, 2u);

  // Zero gradient: moments decay, weights stay.
  PolicyParams zero_grad(cfg);
  zero_grad.set_zero();
  AdamState s2 = make_adam(p);
  s2.m.H2.setConstant(1.0);
  adam_step(p, zero_grad, s2, 0.1);
  EXPECT_NEAR(s2.m.H2(0, 0), 0.9, 1e-15);
  PolicyParams bad(cfg);
  bad.set_zero();
  bad.W1(0, 0) = std::nan("");
  try {
    adam_step(p, bad, s2, 0.1);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("W1"), std::string::npos);
  }
}

TEST(Checkpoint, RoundTripAndValidation) {
  PolicyConfig cfg;
  cfg.d = 8;
  PolicyParams p = init_policy(cfg, 7);
  p.bn_mean[1].setConstant(0.25);
  const auto path = std::filesystem::temp_directory_path() / "abcrl_test_policy.ckpt";
  save_policy(path, p, {3, 7, 2});
  CheckpointMeta meta;
  const PolicyParams q = load_policy(path, &meta);
  EXPECT_TRUE(q == p);
  EXPECT_EQ(meta.epoch, 3u);
  EXPECT_EQ(meta.seed, 7u);
  EXPECT_EQ(meta.num_designs, 2u);
  {
    std::ofstream f(path, std::ios::binary | std::ios::app);
    f << "x";
  }
  EXPECT_THROW(load_policy(path), InputError);
  {
    std::ofstream f(path, std::ios::binary);
    f << "ABCRLPOL";
  }
  EXPECT_THROW(load_policy(path), InputError);
  std::filesystem::remove(path);
}
