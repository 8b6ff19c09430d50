#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "mgb/graph.hpp"
#include "mgb/rng.hpp"
#include "mgb/synth.hpp"
#include "mgb/tensor.hpp"

using mgb::Graph;
using mgb::Tensor2;

namespace {

// Connected-components check on a raw edge list.
bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        q.push(w);
      }
    }
  }
  return count == n;
}

}  // namespace

TEST_CASE("preferential attachment: tiny case is a two-edge tree") {
  auto edges = mgb::barabasi_albert(3, 1, 0);
  CHECK(edges.size() == 2);
  CHECK(connected(3, edges));
}

TEST_CASE("preferential attachment: edge count and simple-graph shape") {
  const int n = 50, m = 3;
  auto edges = mgb::barabasi_albert(n, m, 4);
  // clique(3) + 3 per newcomer.
  CHECK(edges.size() == 3 + static_cast<std::size_t>(m) * (n - m));
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    CHECK(a != b);
    CHECK(a >= 0);
    CHECK(b >= 0);
    CHECK(a < n);
    CHECK(b < n);
    auto key = std::minmax(a, b);
    CHECK(seen.insert({key.first, key.second}).second);  // no duplicates
  }
  CHECK(connected(n, edges));
}

TEST_CASE("preferential attachment: deterministic per seed") {
  auto a = mgb::barabasi_albert(100, 2, 9);
  auto b = mgb::barabasi_albert(100, 2, 9);
  auto c = mgb::barabasi_albert(100, 2, 10);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("preferential attachment: heavy-tailed degrees", "[slow]") {
  const int n = 10000;
  auto edges = mgb::barabasi_albert(n, 2, 3);
  std::vector<int> deg(n, 0);
  for (auto [a, b] : edges) {
    ++deg[a];
    ++deg[b];
  }
  int deg2 = 0, deg10 = 0;
  for (int d : deg) {
    deg2 += d == 2;
    deg10 += d == 10;
  }
  CHECK(deg2 > deg10);
}

TEST_CASE("preferential attachment: input validation") {
  CHECK_THROWS(mgb::barabasi_albert(3, 3, 0));  // need n > m
  CHECK_THROWS(mgb::barabasi_albert(3, 0, 0));  // need m >= 1
}

TEST_CASE("sparse normalized propagation matches the dense operator") {
  mgb::Rng rng(5);
  Tensor2 f(6, 3);
  for (double& v : f.data) v = rng.normal();
  std::vector<int> labels = {0, 1, 0, 1, 0, 1};
  auto edges = mgb::barabasi_albert(6, 2, 1);
  Graph g;
  g.n = 6;
  g.d = 3;
  g.num_classes = 2;
  g.edges = edges;
  g.features = f;
  g.labels = labels;
  mgb::validate_graph(g);

  Tensor2 dense = mgb::matmul(mgb::normalized_adjacency(g), f);
  Tensor2 sparse = mgb::norm_adj_propagate(mgb::adjacency_lists(g), f);
  REQUIRE(dense.rows == sparse.rows);
  REQUIRE(dense.cols == sparse.cols);
  for (std::size_t i = 0; i < dense.data.size(); ++i) {
    CHECK(dense.data[i] == Catch::Approx(sparse.data[i]).margin(1e-12));
  }
}

TEST_CASE("synthetic dataset: shape, density, balance, determinism") {
  Graph g = mgb::generate_synthetic(1000, 5, 2, 1);
  CHECK(g.n == 1000);
  CHECK(g.d == 5);
  CHECK(g.num_classes == 2);
  CHECK(mgb::feature_sparsity(g) == 0.0);
  int ones = 0;
  for (int y : g.labels) ones += y;
  CHECK(ones >= 300);
  CHECK(1000 - ones >= 300);

  Graph h = mgb::generate_synthetic(1000, 5, 2, 1);
  CHECK(g.features.data == h.features.data);
  CHECK(g.labels == h.labels);
  CHECK(g.edges == h.edges);
  Graph k = mgb::generate_synthetic(1000, 5, 2, 2);
  CHECK(g.features.data != k.features.data);
}

TEST_CASE("synthetic dataset: labeler is a fixed function of the inputs") {
  Graph g = mgb::generate_synthetic(200, 5, 2, 3);
  auto adj = mgb::adjacency_lists(g);
  auto a = mgb::synthetic_labeler(adj, g.features, 0);
  auto b = mgb::synthetic_labeler(adj, g.features, 0);
  CHECK(a == b);
  CHECK(a.size() == 200);
}

TEST_CASE("synthetic dataset: minimum size enforced") {
  CHECK_THROWS(mgb::generate_synthetic(9, 5, 2, 1));
}

TEST_CASE("scaled presets reproduce the three larger shapes", "[slow]") {
  Graph s2 = mgb::generate_scaled(mgb::ScaledPreset::kS2, 1);
  CHECK(s2.n == 1000);
  CHECK(s2.d == 20);
  CHECK(mgb::feature_sparsity(s2) == 0.0);
  Graph s3 = mgb::generate_scaled(mgb::ScaledPreset::kS3, 1);
  CHECK(s3.n == 1000);
  CHECK(s3.d == 50);
  Graph s4 = mgb::generate_scaled(mgb::ScaledPreset::kS4, 1);
  CHECK(s4.n == 50000);
  CHECK(s4.d == 5);
  int ones = 0;
  for (int y : s4.labels) ones += y;
  CHECK(ones >= 15000);
  CHECK(50000 - ones >= 15000);
}

TEST_CASE("inductive pair: disconnected components and a component split") {
  auto [g, split] = mgb::generate_inductive(60, 40, 4, 7);
  CHECK(g.n == 100);
  CHECK(g.d == 4);
  // No edge crosses the component boundary at node 60.
  for (auto [a, b] : g.edges) {
    CHECK(((a < 60) == (b < 60)));
  }
  // Test = the whole second component.
  REQUIRE(split.test.size() == 40);
  for (int i : split.test) CHECK(i >= 60);
  // Train and val partition the first component.
  std::vector<char> part(100, 0);
  for (int i : split.train) {
    CHECK(i < 60);
    part[i] = 1;
  }
  for (int i : split.val) {
    CHECK(i < 60);
    CHECK(part[i] == 0);
    part[i] = 1;
  }
  CHECK(split.train.size() + split.val.size() == 60);
  // Every class appears in every part.
  for (const auto& ids : {split.train, split.val, split.test}) {
    std::set<int> classes;
    for (int i : ids) classes.insert(g.labels[i]);
    CHECK(classes.size() == 2);
  }
  auto [g2, split2] = mgb::generate_inductive(60, 40, 4, 7);
  CHECK(g.features.data == g2.features.data);
  CHECK(split.train == split2.train);
  CHECK(split.test == split2.test);
}

TEST_CASE("inductive pair: component minimums enforced") {
  CHECK_THROWS(mgb::generate_inductive(9, 40, 4, 1));
  CHECK_THROWS(mgb::generate_inductive(40, 9, 4, 1));
}
