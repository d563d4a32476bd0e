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
  \file policy.hpp
  \brief Policy network: GCN graph encoder, one-block attention recipe encoder
         and a two-layer classification head, with hand-written gradients.

  Row-vector convention throughout: a linear layer is y = x W^T + b.

  GCN layer:   Z = A_hat H W^T + b,  H' = LeakyReLU(BN(Z))
  readout:     h_G = [mean_rows(H), max_rows(H)]
  recipe:      X = E[tokens] + P,  X1 = LN(X + Attn(X)),  X2 = LN(X1 + FFN(X1)),  h_A = X2[0]
  head:        logits = ReLU([h_G, h_A] H1^T + c1) H2^T + c2
*/

#pragma once

#include "actions.hpp"
#include "aig.hpp"
#include "binary_io.hpp"
#include "errors.hpp"
#include "mcts.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace abcrl {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;

struct PolicyConfig {
  uint32_t d = 64;
  uint32_t L = kDefaultRecipeLength;
  uint32_t gcn_layers = 3;
  double leaky_slope = 0.01;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  double ln_eps = 1e-5;

  bool operator==(const PolicyConfig&) const = default;
};

inline constexpr uint32_t kNodeFeatures = 2;
inline constexpr uint32_t kStartToken = kNumActions;

/// Learnable tensors plus batch-norm running statistics.
struct PolicyParams {
  PolicyConfig cfg;
  std::vector<MatrixXd> gcn_W, gcn_b, bn_gamma, bn_beta;
  std::vector<RowVectorXd> bn_mean, bn_var;  // running statistics (not learned)
  MatrixXd emb, pos;
  MatrixXd Wq, bq, Wk, bk, Wv, bv, Wo, bo;
  MatrixXd ln1_g, ln1_b, W1, b1, W2, b2, ln2_g, ln2_b;
  MatrixXd H1, c1, H2, c2;

  PolicyParams() = default;

  /// All tensors zero-filled with the configured shapes (BN/LN gains at 1, running variance at 1).
  explicit PolicyParams(const PolicyConfig& c) : cfg(c) {
    const auto d = static_cast<Eigen::Index>(c.d);
    for (uint32_t k = 0; k < c.gcn_layers; ++k) {
      gcn_W.push_back(MatrixXd::Zero(d, k == 0 ? kNodeFeatures : d));
      gcn_b.push_back(MatrixXd::Zero(1, d));
      bn_gamma.push_back(MatrixXd::Ones(1, d));
      bn_beta.push_back(MatrixXd::Zero(1, d));
      bn_mean.push_back(RowVectorXd::Zero(d));
      bn_var.push_back(RowVectorXd::Ones(d));
    }
    emb = MatrixXd::Zero(kNumActions + 1, d);
    pos = MatrixXd::Zero(c.L + 1, d);
    for (MatrixXd* m : {&Wq, &Wk, &Wv, &Wo}) *m = MatrixXd::Zero(d, d);
    for (MatrixXd* m : {&bq, &bk, &bv, &bo, &ln1_b, &b2, &ln2_b}) *m = MatrixXd::Zero(1, d);
    ln1_g = MatrixXd::Ones(1, d);
    ln2_g = MatrixXd::Ones(1, d);
    W1 = MatrixXd::Zero(2 * d, d);
    b1 = MatrixXd::Zero(1, 2 * d);
    W2 = MatrixXd::Zero(d, 2 * d);
    H1 = MatrixXd::Zero(d, 3 * d);
    c1 = MatrixXd::Zero(1, d);
    H2 = MatrixXd::Zero(kNumActions, d);
    c2 = MatrixXd::Zero(1, kNumActions);
  }

  /// Named learnable tensors in a fixed order.
  std::vector<std::pair<std::string, MatrixXd*>> tensors() {
    std::vector<std::pair<std::string, MatrixXd*>> t;
    for (uint32_t k = 0; k < gcn_W.size(); ++k) {
      const std::string p = "gcn." + std::to_string(k) + ".";
      t.emplace_back(p + "W", &gcn_W[k]);
      t.emplace_back(p + "b", &gcn_b[k]);
      t.emplace_back(p + "bn_gamma", &bn_gamma[k]);
      t.emplace_back(p + "bn_beta", &bn_beta[k]);
    }
    t.emplace_back("recipe.emb", &emb);
    t.emplace_back("recipe.pos", &pos);
    t.emplace_back("recipe.attn.Wq", &Wq);
    t.emplace_back("recipe.attn.bq", &bq);
    t.emplace_back("recipe.attn.Wk", &Wk);
    t.emplace_back("recipe.attn.bk", &bk);
    t.emplace_back("recipe.attn.Wv", &Wv);
    t.emplace_back("recipe.attn.bv", &bv);
    t.emplace_back("recipe.attn.Wo", &Wo);
    t.emplace_back("recipe.attn.bo", &bo);
    t.emplace_back("recipe.ln1.g", &ln1_g);
    t.emplace_back("recipe.ln1.b", &ln1_b);
    t.emplace_back("recipe.ffn.W1", &W1);
    t.emplace_back("recipe.ffn.b1", &b1);
    t.emplace_back("recipe.ffn.W2", &W2);
    t.emplace_back("recipe.ffn.b2", &b2);
    t.emplace_back("recipe.ln2.g", &ln2_g);
    t.emplace_back("recipe.ln2.b", &ln2_b);
    t.emplace_back("head.H1", &H1);
    t.emplace_back("head.c1", &c1);
    t.emplace_back("head.H2", &H2);
    t.emplace_back("head.c2", &c2);
    return t;
  }
  std::vector<std::pair<std::string, const MatrixXd*>> tensors() const {
    std::vector<std::pair<std::string, const MatrixXd*>> out;
    for (auto& [n, p] : const_cast<PolicyParams*>(this)->tensors()) out.emplace_back(n, p);
    return out;
  }

  void set_zero() {
    for (auto& [n, p] : tensors()) p->setZero();
  }

  bool operator==(const PolicyParams& o) const {
    if (!(cfg == o.cfg)) return false;
    auto a = tensors();
    auto b = o.tensors();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].second->rows() != b[i].second->rows() || a[i].second->cols() != b[i].second->cols()) return false;
      if (*a[i].second != *b[i].second) return false;
    }
    for (std::size_t k = 0; k < bn_mean.size(); ++k) {
      if (bn_mean[k] != o.bn_mean[k] || bn_var[k] != o.bn_var[k]) return false;
    }
    return true;
  }
};

/// He-normal initialization; the output layer is scaled by `final_scale`.
inline PolicyParams init_policy(const PolicyConfig& cfg, uint64_t seed, double final_scale = 0.01) {
  PolicyParams p(cfg);
  std::mt19937_64 rng(seed);
  auto he = [&](MatrixXd& m) {
    std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / static_cast<double>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = nd(rng);
    }
  };
  for (auto& w : p.gcn_W) he(w);
  for (MatrixXd* m : {&p.emb, &p.pos, &p.Wq, &p.Wk, &p.Wv, &p.Wo, &p.W1, &p.W2, &p.H1, &p.H2}) he(*m);
  p.H2 *= final_scale;
  return p;
}

// ---------------------------------------------------------------------------
// Graph input

struct GraphInput {
  Eigen::SparseMatrix<double> A_hat;  // symmetric normalized adjacency with self-loops
  MatrixXd X;                         // n x 2 node features
  uint32_t num_nodes() const { return static_cast<uint32_t>(X.rows()); }
};

/// Graph nodes are the PIs followed by the AND nodes (the constant is omitted).
/// Features: type code (PI 0, AND driving an output 1, other AND 2) and the
/// number of complemented fan-ins.
inline GraphInput make_graph_input(const Aig& g) {
  const uint32_t n = g.num_pis() + g.num_ands();
  if (n == 0) throw InputError("policy: cannot embed an empty graph");
  GraphInput in;
  in.X = MatrixXd::Zero(n, kNodeFeatures);
  std::vector<char> drives_po(g.size(), 0);
  for (auto o : g.outputs()) drives_po[o.node()] = 1;
  std::vector<std::pair<uint32_t, uint32_t>> edges;
  std::vector<double> deg(n, 1.0);
  for (uint32_t v = g.first_and(); v < g.size(); ++v) {
    const uint32_t row = v - 1;
    in.X(row, 0) = drives_po[v] ? 1.0 : 2.0;
    in.X(row, 1) = (g.fanin0(v).complemented() ? 1.0 : 0.0) + (g.fanin1(v).complemented() ? 1.0 : 0.0);
    for (Literal f : {g.fanin0(v), g.fanin1(v)}) {
      if (f.node() == 0) continue;
      edges.emplace_back(row, f.node() - 1);
      deg[row] += 1.0;
      deg[f.node() - 1] += 1.0;
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (uint32_t u = 0; u < n; ++u) trip.emplace_back(u, u, 1.0 / deg[u]);
  for (auto [u, v] : edges) {
    const double w = 1.0 / std::sqrt(deg[u] * deg[v]);
    trip.emplace_back(u, v, w);
    trip.emplace_back(v, u, w);
  }
  in.A_hat.resize(n, n);
  in.A_hat.setFromTriplets(trip.begin(), trip.end());
  return in;
}

enum class BnMode {
  train,   // per-graph statistics, running statistics updated
  frozen,  // running statistics, no update
};

namespace detail {

inline MatrixXd leaky(const MatrixXd& x, double s) { return x.unaryExpr([s](double v) { return v > 0 ? v : s * v; }); }
inline MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }

inline MatrixXd softmax_rows(const MatrixXd& s) {
  MatrixXd a(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    RowVectorXd e = (s.row(i).array() - m).exp();
    a.row(i) = e / e.sum();
  }
  return a;
}

struct LnCache {
  MatrixXd xhat;
  Eigen::VectorXd inv_std;
};

inline MatrixXd layer_norm(const MatrixXd& x, const MatrixXd& g, const MatrixXd& b, double eps, LnCache& c) {
  const auto D = static_cast<double>(x.cols());
  c.xhat.resize(x.rows(), x.cols());
  c.inv_std.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mu = x.row(i).mean();
    const RowVectorXd xc = x.row(i).array() - mu;
    const double var = xc.squaredNorm() / D;
    c.inv_std(i) = 1.0 / std::sqrt(var + eps);
    c.xhat.row(i) = xc * c.inv_std(i);
  }
  MatrixXd y = c.xhat.array().rowwise() * g.row(0).array();
  y.rowwise() += b.row(0);
  return y;
}

inline MatrixXd layer_norm_backward(const MatrixXd& dy, const MatrixXd& g, const LnCache& c, MatrixXd& dg, MatrixXd& db) {
  const auto D = static_cast<double>(dy.cols());
  dg.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  db.row(0) += dy.colwise().sum();
  const MatrixXd dxhat = dy.array().rowwise() * g.row(0).array();
  MatrixXd dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double s1 = dxhat.row(i).sum();
    const double s2 = dxhat.row(i).dot(c.xhat.row(i));
    dx.row(i) = (c.inv_std(i) / D) * (D * dxhat.row(i).array() - s1 - c.xhat.row(i).array() * s2).matrix();
  }
  return dx;
}

}  // namespace detail

/// Cached forward state of the GCN on one graph.
struct GcnCache {
  std::vector<MatrixXd> M, Zhat, Y;  // M = A_hat H_{k-1}
  std::vector<RowVectorXd> inv_std;
  std::vector<MatrixXd> H;           // H[0] = X
  std::vector<Eigen::Index> argmax;  // per output column
  BnMode mode = BnMode::frozen;
};

inline RowVectorXd gcn_forward(PolicyParams& p, const GraphInput& in, BnMode mode, GcnCache* cache = nullptr) {
  const auto n = static_cast<double>(in.num_nodes());
  GcnCache local;
  GcnCache& c = cache ? *cache : local;
  c = GcnCache{};
  c.mode = mode;
  c.H.push_back(in.X);
  for (uint32_t k = 0; k < p.cfg.gcn_layers; ++k) {
    MatrixXd M = in.A_hat * c.H.back();
    MatrixXd Z = M * p.gcn_W[k].transpose();
    Z.rowwise() += p.gcn_b[k].row(0);
    RowVectorXd mean, var;
    if (mode == BnMode::train) {
      mean = Z.colwise().mean();
      var = (Z.rowwise() - mean).array().square().colwise().sum() / n;
      p.bn_mean[k] = (1.0 - p.cfg.bn_momentum) * p.bn_mean[k] + p.cfg.bn_momentum * mean;
      p.bn_var[k] = (1.0 - p.cfg.bn_momentum) * p.bn_var[k] + p.cfg.bn_momentum * var;
    } else {
      mean = p.bn_mean[k];
      var = p.bn_var[k];
    }
    RowVectorXd inv_std = (var.array() + p.cfg.bn_eps).rsqrt();
    MatrixXd Zhat = (Z.rowwise() - mean).array().rowwise() * inv_std.array();
    MatrixXd Y = Zhat.array().rowwise() * p.bn_gamma[k].row(0).array();
    Y.rowwise() += p.bn_beta[k].row(0);
    c.M.push_back(std::move(M));
    c.Zhat.push_back(std::move(Zhat));
    c.inv_std.push_back(std::move(inv_std));
    c.H.push_back(detail::leaky(Y, p.cfg.leaky_slope));
    c.Y.push_back(std::move(Y));
  }
  const MatrixXd& H = c.H.back();
  const auto d = H.cols();
  RowVectorXd h(2 * d);
  c.argmax.assign(static_cast<std::size_t>(d), 0);
  for (Eigen::Index j = 0; j < d; ++j) {
    h(j) = H.col(j).mean();
    Eigen::Index r = 0;
    h(d + j) = H.col(j).maxCoeff(&r);
    c.argmax[static_cast<std::size_t>(j)] = r;
  }
  return h;
}

inline RowVectorXd gcn_embed(const PolicyParams& p, const GraphInput& in) {
  PolicyParams& mut = const_cast<PolicyParams&>(p);  // frozen mode does not write
  return gcn_forward(mut, in, BnMode::frozen);
}

inline void gcn_backward(const PolicyParams& p, const GraphInput& in, const GcnCache& c, const RowVectorXd& dh, PolicyParams& g) {
  const MatrixXd& H = c.H.back();
  const auto n = H.rows();
  const auto d = H.cols();
  MatrixXd dH = MatrixXd::Zero(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    dH.col(j).array() += dh(j) / static_cast<double>(n);
    dH(c.argmax[static_cast<std::size_t>(j)], j) += dh(d + j);
  }
  for (auto k = static_cast<int>(p.cfg.gcn_layers) - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    const double s = p.cfg.leaky_slope;
    const MatrixXd dY = dH.array() * c.Y[ku].unaryExpr([s](double v) { return v > 0 ? 1.0 : s; }).array();
    g.bn_gamma[ku].row(0) += (dY.array() * c.Zhat[ku].array()).colwise().sum().matrix();
    g.bn_beta[ku].row(0) += dY.colwise().sum();
    const MatrixXd dZhat = dY.array().rowwise() * p.bn_gamma[ku].row(0).array();
    MatrixXd dZ;
    if (c.mode == BnMode::train) {
      const auto nn = static_cast<double>(n);
      const RowVectorXd s1 = dZhat.colwise().sum();
      const RowVectorXd s2 = (dZhat.array() * c.Zhat[ku].array()).colwise().sum();
      dZ = ((nn * dZhat).array().rowwise() - s1.array() - (c.Zhat[ku].array().rowwise() * s2.array())).rowwise() *
           (c.inv_std[ku].array() / nn);
    } else {
      dZ = dZhat.array().rowwise() * c.inv_std[ku].array();
    }
    g.gcn_b[ku].row(0) += dZ.colwise().sum();
    g.gcn_W[ku] += dZ.transpose() * c.M[ku];
    if (k > 0) dH = in.A_hat * (dZ * p.gcn_W[ku]);
  }
}

// ---------------------------------------------------------------------------
// Recipe encoder

struct RecipeCache {
  std::vector<uint32_t> tokens;
  MatrixXd X, Q, K, V, A, C, X1, P, R, X2;
  detail::LnCache ln1, ln2;
};

inline RowVectorXd recipe_forward(const PolicyParams& p, const Recipe& prefix, RecipeCache* cache = nullptr) {
  if (prefix.size() > p.cfg.L) throw std::length_error("recipe prefix longer than the encoder's positional table");
  RecipeCache local;
  RecipeCache& c = cache ? *cache : local;
  c.tokens = {kStartToken};
  for (auto a : prefix.actions()) c.tokens.push_back(action_id(a));
  const auto T = static_cast<Eigen::Index>(c.tokens.size());
  const auto d = static_cast<Eigen::Index>(p.cfg.d);
  c.X.resize(T, d);
  for (Eigen::Index i = 0; i < T; ++i) c.X.row(i) = p.emb.row(c.tokens[static_cast<std::size_t>(i)]) + p.pos.row(i);
  auto lin = [](const MatrixXd& x, const MatrixXd& W, const MatrixXd& b) {
    MatrixXd y = x * W.transpose();
    y.rowwise() += b.row(0);
    return y;
  };
  c.Q = lin(c.X, p.Wq, p.bq);
  c.K = lin(c.X, p.Wk, p.bk);
  c.V = lin(c.X, p.Wv, p.bv);
  c.A = detail::softmax_rows(c.Q * c.K.transpose() / std::sqrt(static_cast<double>(d)));
  c.C = c.A * c.V;
  const MatrixXd O = lin(c.C, p.Wo, p.bo);
  c.X1 = detail::layer_norm(c.X + O, p.ln1_g, p.ln1_b, p.cfg.ln_eps, c.ln1);
  c.P = lin(c.X1, p.W1, p.b1);
  c.R = detail::relu(c.P);
  const MatrixXd F = lin(c.R, p.W2, p.b2);
  c.X2 = detail::layer_norm(c.X1 + F, p.ln2_g, p.ln2_b, p.cfg.ln_eps, c.ln2);
  return c.X2.row(0);
}

inline RowVectorXd recipe_embed(const PolicyParams& p, const Recipe& prefix) { return recipe_forward(p, prefix); }

/// Attention weights of the recipe block (rows sum to one).
inline MatrixXd recipe_attention(const PolicyParams& p, const Recipe& prefix) {
  RecipeCache c;
  recipe_forward(p, prefix, &c);
  return c.A;
}

inline void recipe_backward(const PolicyParams& p, const RecipeCache& c, const RowVectorXd& dh, PolicyParams& g) {
  const auto T = c.X.rows();
  const auto d = c.X.cols();
  MatrixXd dX2 = MatrixXd::Zero(T, d);
  dX2.row(0) = dh;
  const MatrixXd dR2 = detail::layer_norm_backward(dX2, p.ln2_g, c.ln2, g.ln2_g, g.ln2_b);
  // FFN
  const MatrixXd& dF = dR2;
  g.W2 += dF.transpose() * c.R;
  g.b2.row(0) += dF.colwise().sum();
  const MatrixXd dP = (dF * p.W2).array() * (c.P.array() > 0.0).cast<double>();
  g.W1 += dP.transpose() * c.X1;
  g.b1.row(0) += dP.colwise().sum();
  const MatrixXd dX1 = dP * p.W1 + dR2;
  const MatrixXd dR1 = detail::layer_norm_backward(dX1, p.ln1_g, c.ln1, g.ln1_g, g.ln1_b);
  // Attention
  const MatrixXd& dO = dR1;
  g.Wo += dO.transpose() * c.C;
  g.bo.row(0) += dO.colwise().sum();
  const MatrixXd dC = dO * p.Wo;
  const MatrixXd dA = dC * c.V.transpose();
  const MatrixXd dV = c.A.transpose() * dC;
  MatrixXd dS(T, T);
  for (Eigen::Index i = 0; i < T; ++i) {
    const double s = dA.row(i).dot(c.A.row(i));
    dS.row(i) = c.A.row(i).array() * (dA.row(i).array() - s);
  }
  dS /= std::sqrt(static_cast<double>(d));
  const MatrixXd dQ = dS * c.K;
  const MatrixXd dK = dS.transpose() * c.Q;
  g.Wq += dQ.transpose() * c.X;
  g.bq.row(0) += dQ.colwise().sum();
  g.Wk += dK.transpose() * c.X;
  g.bk.row(0) += dK.colwise().sum();
  g.Wv += dV.transpose() * c.X;
  g.bv.row(0) += dV.colwise().sum();
  const MatrixXd dX = dR1 + dQ * p.Wq + dK * p.Wk + dV * p.Wv;
  for (Eigen::Index i = 0; i < T; ++i) {
    g.emb.row(c.tokens[static_cast<std::size_t>(i)]) += dX.row(i);
    g.pos.row(i) += dX.row(i);
  }
}

// ---------------------------------------------------------------------------
// Head

struct HeadCache {
  RowVectorXd z, pre, u, logits;
};

inline RowVectorXd head_logits(const PolicyParams& p, const RowVectorXd& hG, const RowVectorXd& hA, HeadCache* cache = nullptr) {
  HeadCache local;
  HeadCache& c = cache ? *cache : local;
  c.z.resize(hG.size() + hA.size());
  c.z << hG, hA;
  c.pre = c.z * p.H1.transpose() + p.c1.row(0);
  c.u = c.pre.cwiseMax(0.0);
  c.logits = c.u * p.H2.transpose() + p.c2.row(0);
  return c.logits;
}

inline ActionDist softmax_dist(const RowVectorXd& logits) {
  const double m = logits.maxCoeff();
  ActionDist out{};
  double s = 0.0;
  for (uint32_t a = 0; a < kNumActions; ++a) s += (out[a] = std::exp(logits(a) - m));
  for (auto& v : out) v /= s;
  return out;
}

/// pi_theta(. | G0, prefix) given a precomputed graph embedding.
inline ActionDist policy_forward(const PolicyParams& p, const RowVectorXd& hG, const Recipe& prefix) {
  return softmax_dist(head_logits(p, hG, recipe_embed(p, prefix)));
}

inline ActionDist policy_forward(const PolicyParams& p, const Aig& g, const Recipe& prefix) {
  return policy_forward(p, gcn_embed(p, make_graph_input(g)), prefix);
}

// ---------------------------------------------------------------------------
// Loss and gradients

struct PolicySample {
  const GraphInput* graph = nullptr;
  Recipe prefix;
  ActionDist target{};
};

inline double cross_entropy(const ActionDist& target, const ActionDist& pi) {
  double l = 0.0;
  for (uint32_t a = 0; a < kNumActions; ++a) {
    if (target[a] > 0.0) l -= target[a] * std::log(pi[a]);
  }
  return l;
}

/// Mean cross-entropy over the batch; accumulates its gradient into `grad`
/// (which must be zero-shaped like p) when given. Samples sharing a graph
/// share one GCN forward/backward.
inline double policy_loss(PolicyParams& p, const std::vector<PolicySample>& batch, BnMode mode, PolicyParams* grad = nullptr) {
  if (batch.empty()) return 0.0;
  const double B = static_cast<double>(batch.size());
  std::vector<const GraphInput*> graphs;
  std::vector<std::size_t> graph_of(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto it = std::find(graphs.begin(), graphs.end(), batch[i].graph);
    graph_of[i] = static_cast<std::size_t>(it - graphs.begin());
    if (it == graphs.end()) graphs.push_back(batch[i].graph);
  }
  std::vector<GcnCache> gcache(graphs.size());
  std::vector<RowVectorXd> hG(graphs.size());
  for (std::size_t j = 0; j < graphs.size(); ++j) hG[j] = gcn_forward(p, *graphs[j], mode, &gcache[j]);
  std::vector<RowVectorXd> dhG(graphs.size(), RowVectorXd::Zero(hG.empty() ? 0 : hG[0].size()));
  double loss = 0.0;
  const auto twod = static_cast<Eigen::Index>(2 * p.cfg.d);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    RecipeCache rc;
    HeadCache hc;
    const RowVectorXd hA = recipe_forward(p, batch[i].prefix, &rc);
    const RowVectorXd logits = head_logits(p, hG[graph_of[i]], hA, &hc);
    const ActionDist pi = softmax_dist(logits);
    loss += cross_entropy(batch[i].target, pi) / B;
    if (!grad) continue;
    RowVectorXd dl(kNumActions);
    double tsum = 0.0;
    for (uint32_t a = 0; a < kNumActions; ++a) tsum += batch[i].target[a];
    for (uint32_t a = 0; a < kNumActions; ++a) dl(a) = (tsum * pi[a] - batch[i].target[a]) / B;
    grad->H2 += dl.transpose() * hc.u;
    grad->c2.row(0) += dl;
    const RowVectorXd du = dl * p.H2;
    const RowVectorXd dpre = du.array() * (hc.pre.array() > 0.0).cast<double>();
    grad->H1 += dpre.transpose() * hc.z;
    grad->c1.row(0) += dpre;
    const RowVectorXd dz = dpre * p.H1;
    dhG[graph_of[i]] += dz.head(twod);
    recipe_backward(p, rc, dz.tail(dz.size() - twod), *grad);
  }
  if (grad) {
    for (std::size_t j = 0; j < graphs.size(); ++j) gcn_backward(p, *graphs[j], gcache[j], dhG[j], *grad);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t t = 0;
  PolicyParams m, v;
};

inline AdamState make_adam(const PolicyParams& p) {
  AdamState s;
  s.m = PolicyParams(p.cfg);
  s.m.set_zero();
  s.v = s.m;
  return s;
}

/// One Adam update with the given gradient; throws on a non-finite gradient.
inline void adam_step(PolicyParams& p, PolicyParams& grad, AdamState& s, double lr) {
  auto pt = p.tensors();
  auto gt = grad.tensors();
  auto mt = s.m.tensors();
  auto vt = s.v.tensors();
  for (auto& [name, g] : gt) {
    if (!g->allFinite()) throw NumericError("non-finite gradient in " + name);
  }
  ++s.t;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < pt.size(); ++i) {
    MatrixXd& w = *pt[i].second;
    const MatrixXd& g = *gt[i].second;
    MatrixXd& m = *mt[i].second;
    MatrixXd& v = *vt[i].second;
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
    if (lr != 0.0) {
      w.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + s.eps);
    }
  }
}

/// Loss, gradient and one Adam update on a batch. Returns the pre-step loss.
inline double grad_step(PolicyParams& p, const std::vector<PolicySample>& batch, AdamState& s, double lr, BnMode mode = BnMode::train) {
  PolicyParams grad(p.cfg);
  grad.set_zero();
  const double loss = policy_loss(p, batch, mode, &grad);
  if (!std::isfinite(loss)) throw NumericError("non-finite policy loss");
  adam_step(p, grad, s, lr);
  return loss;
}

// ---------------------------------------------------------------------------
// Checkpoint

struct CheckpointMeta {
  uint32_t epoch = 0;
  uint64_t seed = 0;
  uint32_t num_designs = 0;
};

inline constexpr uint32_t kCheckpointVersion = 1;

inline std::string serialize_policy(const PolicyParams& p, const CheckpointMeta& meta) {
  BinaryWriter w;
  w.magic("ABCRLPOL");
  w.u32(kCheckpointVersion);
  w.u32(p.cfg.d);
  w.u32(p.cfg.L);
  w.u32(p.cfg.gcn_layers);
  w.f64(p.cfg.leaky_slope);
  w.f64(p.cfg.bn_eps);
  w.f64(p.cfg.bn_momentum);
  w.f64(p.cfg.ln_eps);
  w.u32(meta.epoch);
  w.u64(meta.seed);
  w.u32(meta.num_designs);
  const auto ts = p.tensors();
  w.u32(static_cast<uint32_t>(ts.size()));
  for (const auto& [name, m] : ts) {
    w.str(name);
    w.u32(static_cast<uint32_t>(m->rows()));
    w.u32(static_cast<uint32_t>(m->cols()));
  }
  for (const auto& [name, m] : ts) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) w.f64((*m)(i, j));
    }
  }
  for (uint32_t k = 0; k < p.cfg.gcn_layers; ++k) {
    for (Eigen::Index j = 0; j < p.bn_mean[k].size(); ++j) w.f64(p.bn_mean[k](j));
    for (Eigen::Index j = 0; j < p.bn_var[k].size(); ++j) w.f64(p.bn_var[k](j));
  }
  return w.bytes();
}

inline void save_policy(const std::filesystem::path& path, const PolicyParams& p, const CheckpointMeta& meta) {
  BinaryWriter w;
  w.magic(serialize_policy(p, meta));
  w.save(path);
}

inline PolicyParams load_policy(const std::filesystem::path& path, CheckpointMeta* meta = nullptr) {
  auto r = BinaryReader::from_file(path);
  r.expect_magic("ABCRLPOL");
  if (r.u32() != kCheckpointVersion) throw InputError(path.string() + ": unsupported checkpoint version");
  PolicyConfig cfg;
  cfg.d = r.u32();
  cfg.L = r.u32();
  cfg.gcn_layers = r.u32();
  cfg.leaky_slope = r.f64();
  cfg.bn_eps = r.f64();
  cfg.bn_momentum = r.f64();
  cfg.ln_eps = r.f64();
  if (cfg.d == 0 || cfg.d > 4096 || cfg.L > 1024 || cfg.gcn_layers == 0 || cfg.gcn_layers > 64) {
    throw InputError(path.string() + ": implausible checkpoint configuration");
  }
  CheckpointMeta m;
  m.epoch = r.u32();
  m.seed = r.u64();
  m.num_designs = r.u32();
  PolicyParams p(cfg);
  auto ts = p.tensors();
  if (r.u32() != ts.size()) throw InputError(path.string() + ": tensor count does not match the manifest");
  for (auto& [name, t] : ts) {
    const std::string n = r.str();
    const uint32_t rows = r.u32();
    const uint32_t cols = r.u32();
    if (n != name || rows != t->rows() || cols != t->cols()) {
      throw InputError(path.string() + ": manifest mismatch at tensor " + name);
    }
  }
  for (auto& [name, t] : ts) {
    for (Eigen::Index i = 0; i < t->rows(); ++i) {
      for (Eigen::Index j = 0; j < t->cols(); ++j) (*t)(i, j) = r.f64();
    }
    if (!t->allFinite()) throw NumericError(path.string() + ": non-finite values in " + name);
  }
  for (uint32_t k = 0; k < cfg.gcn_layers; ++k) {
    for (Eigen::Index j = 0; j < p.bn_mean[k].size(); ++j) p.bn_mean[k](j) = r.f64();
    for (Eigen::Index j = 0; j < p.bn_var[k].size(); ++j) p.bn_var[k](j) = r.f64();
  }
  if (!r.at_end()) throw InputError(path.string() + ": trailing bytes after checkpoint");
  if (meta) *meta = m;
  return p;
}

/// Prior provider for a search on one design with fixed (or externally updated) parameters.
inline PriorProvider make_prior(const PolicyParams& p, const Aig& g0, std::function<uint64_t()> version = nullptr) {
  auto graph = std::make_shared<GraphInput>(make_graph_input(g0));
  auto cached = std::make_shared<std::pair<uint64_t, RowVectorXd>>(~uint64_t{0}, RowVectorXd());
  PriorProvider prov;
  prov.version = version;
  prov.probs = [&p, graph, cached, version](const Recipe& prefix) {
    const uint64_t v = version ? version() : 0;
    if (cached->first != v) *cached = {v, gcn_embed(p, *graph)};
    return policy_forward(p, cached->second, prefix);
  };
  return prov;
}

}  // namespace abcrl
