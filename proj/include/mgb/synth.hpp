#pragma once

// Synthetic dataset generation: preferential-attachment topology, Gaussian
// features, and a fixed random two-layer graph-convolution labeler whose
// weights come from an internal seed so the labeling function does not
// change with the data seed.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mgb/graph.hpp"
#include "mgb/rng.hpp"
#include "mgb/tensor.hpp"

namespace mgb {

inline std::vector<std::pair<int, int>> barabasi_albert(int n, int m_attach,
                                                        std::uint64_t seed) {
  if (m_attach < 1) throw std::invalid_argument("barabasi_albert: m_attach >= 1");
  if (n <= m_attach) throw std::invalid_argument("barabasi_albert: need n > m_attach");
  Rng rng(mix_seed(seed, 0xBABAu));
  std::vector<std::pair<int, int>> edges;
  // Degree-proportional sampling by drawing uniformly from the list of all
  // edge endpoints seen so far.
  std::vector<int> endpoints;
  for (int a = 0; a < m_attach; ++a) {
    for (int b = a + 1; b < m_attach; ++b) {
      edges.emplace_back(a, b);
      endpoints.push_back(a);
      endpoints.push_back(b);
    }
  }
  std::vector<int> targets;
  std::vector<char> chosen(n, 0);
  for (int v = m_attach; v < n; ++v) {
    targets.clear();
    while (static_cast<int>(targets.size()) < m_attach) {
      int t;
      if (endpoints.empty()) {
        // Degenerate start (m_attach = 1 has a one-node, zero-edge seed
        // graph): fall back to a uniform choice among existing nodes.
        t = static_cast<int>(rng.integer(static_cast<std::uint64_t>(v)));
      } else {
        t = endpoints[rng.integer(endpoints.size())];
      }
      if (!chosen[t]) {
        chosen[t] = 1;
        targets.push_back(t);
      }
    }
    for (int t : targets) {
      chosen[t] = 0;
      edges.emplace_back(t, v);
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return edges;
}

// One normalized-adjacency propagation step computed from adjacency lists:
// out_i = sum over j in N(i) and j = i of h_j / sqrt((1+deg_i)(1+deg_j)).
// Matches the dense operator exactly while staying O(edges) in memory, so
// it also works at the 50000-node preset.
inline Tensor2 norm_adj_propagate(const std::vector<std::vector<int>>& adj,
                                  const Tensor2& h) {
  const int n = static_cast<int>(adj.size());
  if (h.rows != n) throw std::invalid_argument("propagate: shape mismatch");
  std::vector<double> inv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(1.0 + static_cast<double>(adj[i].size()));
  }
  Tensor2 out(n, h.cols);
  for (int i = 0; i < n; ++i) {
    const double self = inv_sqrt[i] * inv_sqrt[i];
    for (int c = 0; c < h.cols; ++c) out.at(i, c) = self * h.at(i, c);
    for (int j : adj[i]) {
      const double w = inv_sqrt[i] * inv_sqrt[j];
      for (int c = 0; c < h.cols; ++c) out.at(i, c) += w * h.at(j, c);
    }
  }
  return out;
}

namespace detail {

// The labeler's weights never depend on the data seed; `retry` only moves
// when a draw produced a class imbalance.
inline constexpr std::uint64_t kLabelerSeed = 0x1DULL;
inline constexpr int kLabelerHidden = 16;
inline constexpr int kLabelerRetries = 64;
inline constexpr double kBalanceFloor = 0.30;

}  // namespace detail

// Labels = per-row argmax of a two-layer graph convolution with standard
// normal weights drawn at a fixed internal seed (plus the retry index).
inline std::vector<int> synthetic_labeler(const std::vector<std::vector<int>>& adj,
                                          const Tensor2& features, int retry) {
  const int d = features.cols;
  Rng rng(mix_seed(detail::kLabelerSeed, static_cast<std::uint64_t>(retry)));
  Tensor2 w1(d, detail::kLabelerHidden), w2(detail::kLabelerHidden, 2);
  std::vector<double> b1(detail::kLabelerHidden), b2(2);
  for (double& v : w1.data) v = rng.normal();
  for (double& v : b1) v = rng.normal();
  for (double& v : w2.data) v = rng.normal();
  for (double& v : b2) v = rng.normal();

  Tensor2 h = norm_adj_propagate(adj, features);
  Tensor2 z1 = matmul(h, w1);
  for (int i = 0; i < z1.rows; ++i) {
    for (int c = 0; c < z1.cols; ++c) {
      z1.at(i, c) = std::max(0.0, z1.at(i, c) + b1[c]);
    }
  }
  Tensor2 h2 = norm_adj_propagate(adj, z1);
  Tensor2 z2 = matmul(h2, w2);
  std::vector<int> labels(features.rows);
  for (int i = 0; i < z2.rows; ++i) {
    labels[i] = z2.at(i, 0) + b2[0] >= z2.at(i, 1) + b2[1] ? 0 : 1;
  }
  return labels;
}

namespace detail {

inline std::vector<int> balanced_labels(const std::vector<std::vector<int>>& adj,
                                        const Tensor2& features) {
  const int n = features.rows;
  for (int retry = 0; retry < kLabelerRetries; ++retry) {
    std::vector<int> labels = synthetic_labeler(adj, features, retry);
    int ones = 0;
    for (int y : labels) ones += y;
    const int minority = std::min(ones, n - ones);
    if (minority >= static_cast<int>(std::ceil(kBalanceFloor * n))) return labels;
  }
  throw std::runtime_error("synthetic labeler: class-balance retries exhausted");
}

inline std::vector<std::vector<int>> lists_from_edges(
    int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

}  // namespace detail

inline Graph generate_synthetic(int n = 1000, int d = 5, int m_attach = 2,
                                std::uint64_t seed = 0) {
  if (n < 10) throw std::invalid_argument("generate_synthetic: need n >= 10");
  Graph g;
  g.n = n;
  g.d = d;
  g.num_classes = 2;
  g.edges = barabasi_albert(n, m_attach, mix_seed(seed, 0x70B0u));
  g.features = Tensor2(n, d);
  Rng rng(mix_seed(seed, 0xFEA7u));
  for (double& v : g.features.data) v = rng.normal();
  g.labels = detail::balanced_labels(detail::lists_from_edges(n, g.edges),
                                     g.features);
  validate_graph(g);
  return g;
}

enum class ScaledPreset { kS2, kS3, kS4 };

inline Graph generate_scaled(ScaledPreset preset, std::uint64_t seed) {
  switch (preset) {
    case ScaledPreset::kS2: return generate_synthetic(1000, 20, 2, seed);
    case ScaledPreset::kS3: return generate_synthetic(1000, 50, 2, seed);
    case ScaledPreset::kS4: return generate_synthetic(50000, 5, 2, seed);
  }
  throw std::invalid_argument("unknown scaled preset");
}

// Two disconnected components sharing one labeling function. The second
// component is entirely test; the first is stratified 3:1 into train/val
// (the usual 60/20 proportions applied within the in-graph portion).
inline std::pair<Graph, NodeSplit> generate_inductive(int n_train_component,
                                                      int n_test_component,
                                                      int d, std::uint64_t seed) {
  if (n_train_component < 10 || n_test_component < 10) {
    throw std::invalid_argument("generate_inductive: components need >= 10 nodes");
  }
  const int n = n_train_component + n_test_component;
  Graph g;
  g.n = n;
  g.d = d;
  g.num_classes = 2;
  g.edges = barabasi_albert(n_train_component, 2, mix_seed(seed, 0x70B0u));
  auto test_edges =
      barabasi_albert(n_test_component, 2, mix_seed(seed, 0x70B1u));
  for (auto [a, b] : test_edges) {
    g.edges.emplace_back(a + n_train_component, b + n_train_component);
  }
  g.features = Tensor2(n, d);
  Rng rng(mix_seed(seed, 0xFEA7u));
  for (double& v : g.features.data) v = rng.normal();
  g.labels = detail::balanced_labels(detail::lists_from_edges(n, g.edges),
                                     g.features);
  validate_graph(g);

  NodeSplit split;
  for (int i = n_train_component; i < n; ++i) split.test.push_back(i);
  std::vector<std::vector<int>> by_class(2);
  for (int i = 0; i < n_train_component; ++i) by_class[g.labels[i]].push_back(i);
  Rng split_rng(mix_seed(seed, 0x51A7u));
  for (auto& ids : by_class) {
    if (ids.size() < 2) {
      throw std::runtime_error(
          "generate_inductive: a class is too rare in the train component");
    }
    shuffle(ids, split_rng);
    const auto k = ids.size() - std::max<std::size_t>(1, ids.size() / 4);
    for (std::size_t t = 0; t < ids.size(); ++t) {
      (t < k ? split.train : split.val).push_back(ids[t]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  return {std::move(g), std::move(split)};
}

}  // namespace mgb
