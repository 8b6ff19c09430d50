// Node-classification graph container plus the structural helpers everything
// else builds on: symmetric normalized adjacency, exact-zero feature
// sparsity, and deterministic stratified train/val/test splits (transductive
// or component-isolating inductive).
#pragma once

#include <algorithm>
#include <cmath>
#include <array>
#include <cstdint>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mgb/rng.hpp"
#include "mgb/tensor.hpp"

namespace mgb {

struct Graph {
  int n = 0;            // number of nodes
  int d = 0;            // number of feature columns
  int num_classes = 0;  // labels take values in [0, num_classes)
  // Undirected edges, stored once per pair as (lo, hi), no self-loops.
  std::vector<std::pair<int, int>> edges;
  Tensor2 features;         // n x d
  std::vector<int> labels;  // length n
  // Optional per-entry "value absent" markers for ingested datasets (n*d
  // row-major flags; empty means fully observed). Kept out of the value
  // range on purpose: 0.0 is a legitimate feature value.
  std::vector<std::uint8_t> absent;
};

inline void validate_graph(const Graph& g) {
  if (g.n <= 0) throw std::invalid_argument("graph: need at least one node");
  if (g.d <= 0) throw std::invalid_argument("graph: need at least one feature");
  if (g.num_classes < 2) {
    throw std::invalid_argument("graph: need at least two classes");
  }
  if (g.features.rows != g.n || g.features.cols != g.d) {
    throw std::invalid_argument("graph: feature matrix shape mismatch");
  }
  if (static_cast<int>(g.labels.size()) != g.n) {
    throw std::invalid_argument("graph: label count mismatch");
  }
  for (int y : g.labels) {
    if (y < 0 || y >= g.num_classes) {
      throw std::invalid_argument("graph: label out of range");
    }
  }
  if (!g.absent.empty() &&
      g.absent.size() != static_cast<std::size_t>(g.n) * g.d) {
    throw std::invalid_argument("graph: absent-marker shape mismatch");
  }
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : g.edges) {
    if (u < 0 || u >= g.n || v < 0 || v >= g.n) {
      throw std::invalid_argument("graph: edge endpoint out of range");
    }
    if (u == v) throw std::invalid_argument("graph: self-loop");
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
      throw std::invalid_argument("graph: duplicate edge pair");
    }
  }
}

// Canonicalizes a raw edge list for ingestion: orients each pair low-high,
// drops self-loops and duplicates, sorts.
inline std::vector<std::pair<int, int>> normalize_edges(
    std::vector<std::pair<int, int>> edges) {
  std::vector<std::pair<int, int>> out;
  out.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u == v) continue;
    out.push_back({std::min(u, v), std::max(u, v)});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<std::vector<int>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<int>> adj(g.n);
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

// Symmetric degree-normalized adjacency with self-loops,
// D^{-1/2} (A + I) D^{-1/2}, as a dense n x n matrix.
inline Tensor2 normalized_adjacency(const Graph& g) {
  std::vector<double> deg(g.n, 1.0);  // self-loop contributes 1
  for (auto [u, v] : g.edges) {
    deg[u] += 1.0;
    deg[v] += 1.0;
  }
  Tensor2 a(g.n, g.n);
  for (int i = 0; i < g.n; ++i) a.at(i, i) = 1.0 / deg[i];
  for (auto [u, v] : g.edges) {
    const double w = 1.0 / std::sqrt(deg[u] * deg[v]);
    a.at(u, v) = w;
    a.at(v, u) = w;
  }
  return a;
}

// Fraction of exactly-zero feature entries. Only meaningful when every entry
// is actually observed, hence the absent-marker guard.
inline double feature_sparsity(const Graph& g) {
  for (std::uint8_t m : g.absent) {
    if (m) {
      throw std::invalid_argument(
          "feature_sparsity: graph carries absent markers");
    }
  }
  std::size_t zeros = 0;
  for (double v : g.features.data) {
    if (v == 0.0) ++zeros;
  }
  return static_cast<double>(zeros) / static_cast<double>(g.features.data.size());
}

struct NodeSplit {
  std::vector<int> train, val, test;
};

enum class SplitMode { kTransductive, kInductive };

namespace detail {

// Stratified partition of `ids` (grouped by class already) into up to three
// segments using rounded cumulative boundaries.
inline void stratify_into(const std::vector<int>& ids, double f1, double f2,
                          Rng& rng, std::vector<int>* a, std::vector<int>* b,
                          std::vector<int>* c) {
  std::vector<int> pool = ids;
  shuffle(pool, rng);
  const auto nmemb = static_cast<double>(pool.size());
  const auto b1 = static_cast<std::size_t>(std::llround(f1 * nmemb));
  const auto b2 = static_cast<std::size_t>(std::llround((f1 + f2) * nmemb));
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (k < b1) {
      a->push_back(pool[k]);
    } else if (k < b2) {
      b->push_back(pool[k]);
    } else if (c != nullptr) {
      c->push_back(pool[k]);
    }
  }
}

inline std::vector<std::vector<int>> connected_components(const Graph& g) {
  auto adj = adjacency_lists(g);
  std::vector<int> comp(g.n, -1);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < g.n; ++s) {
    if (comp[s] >= 0) continue;
    comps.emplace_back();
    std::queue<int> q;
    q.push(s);
    comp[s] = static_cast<int>(comps.size()) - 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      comps.back().push_back(u);
      for (int v : adj[u]) {
        if (comp[v] < 0) {
          comp[v] = comp[u];
          q.push(v);
        }
      }
    }
  }
  return comps;
}

inline void check_no_cross_edges(const Graph& g, const NodeSplit& s) {
  std::vector<std::uint8_t> in_test(g.n, 0), in_fit(g.n, 0);
  for (int i : s.test) in_test[i] = 1;
  for (int i : s.train) in_fit[i] = 1;
  for (int i : s.val) in_fit[i] = 1;
  for (auto [u, v] : g.edges) {
    if ((in_test[u] && in_fit[v]) || (in_test[v] && in_fit[u])) {
      throw std::runtime_error(
          "make_split: inductive split has an edge between test and "
          "train/val");
    }
  }
}

}  // namespace detail

// Deterministic stratified split. fractions = (train, val, test), each
// positive, summing to at most 1. Every class must land at least one node in
// every part. Inductive mode assigns whole connected components to the test
// side and verifies that no edge crosses between test and train/val.
inline NodeSplit make_split(const Graph& g, std::array<double, 3> fractions,
                            SplitMode mode, std::uint64_t seed) {
  validate_graph(g);
  const double sum = fractions[0] + fractions[1] + fractions[2];
  for (double f : fractions) {
    if (f <= 0.0 || f >= 1.0) {
      throw std::invalid_argument("make_split: fractions must be in (0,1)");
    }
  }
  if (sum > 1.0 + 1e-9) {
    throw std::invalid_argument("make_split: fractions sum above 1");
  }

  std::vector<std::vector<int>> by_class(g.num_classes);
  for (int i = 0; i < g.n; ++i) by_class[g.labels[i]].push_back(i);

  NodeSplit s;
  Rng rng(mix_seed(seed, 0x51A7u));

  if (mode == SplitMode::kTransductive) {
    for (const auto& ids : by_class) {
      detail::stratify_into(ids, fractions[0], fractions[1], rng, &s.train,
                            &s.val, &s.test);
    }
  } else {
    auto comps = detail::connected_components(g);
    std::vector<int> order(comps.size());
    for (std::size_t k = 0; k < comps.size(); ++k) order[k] = static_cast<int>(k);
    shuffle(order, rng);
    const auto target =
        static_cast<std::size_t>(std::llround(fractions[2] * g.n));
    std::vector<std::uint8_t> is_test(g.n, 0);
    for (int k : order) {
      if (s.test.size() >= target) break;
      for (int i : comps[k]) {
        s.test.push_back(i);
        is_test[i] = 1;
      }
    }
    // Remaining nodes split into train/val with rescaled fractions.
    const double fit_frac = fractions[0] + fractions[1];
    std::vector<std::vector<int>> rest(g.num_classes);
    for (int i = 0; i < g.n; ++i) {
      if (!is_test[i]) rest[g.labels[i]].push_back(i);
    }
    for (const auto& ids : rest) {
      detail::stratify_into(ids, fractions[0] / fit_frac, fractions[1] / fit_frac,
                            rng, &s.train, &s.val, nullptr);
    }
  }

  // Every class must be represented in every part.
  for (int c = 0; c < g.num_classes; ++c) {
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      const bool present = std::any_of(part->begin(), part->end(),
                                       [&](int i) { return g.labels[i] == c; });
      if (!present) {
        throw std::invalid_argument(
            "make_split: class " + std::to_string(c) +
            " has fewer nodes than the split requires");
      }
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  if (mode == SplitMode::kInductive) detail::check_no_cross_edges(g, s);
  return s;
}

}  // namespace mgb
