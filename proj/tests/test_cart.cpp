#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "mgb/cart.hpp"
#include "mgb/rng.hpp"

using mgb::Cmp;
using mgb::DecisionTree;
using mgb::Tensor2;

namespace {

Tensor2 column(std::initializer_list<double> vals) {
  Tensor2 t(static_cast<int>(vals.size()), 1);
  int i = 0;
  for (double v : vals) t.at(i++, 0) = v;
  return t;
}

}  // namespace

TEST_CASE("separable 1-d data splits at the gap midpoint") {
  Tensor2 x = column({-2, -1, 1, 2});
  std::vector<int> y = {0, 0, 1, 1};
  DecisionTree tree = mgb::fit_tree(x, y, /*max_depth=*/1, /*min_leaf=*/1);
  auto paths = mgb::positive_paths(tree);
  REQUIRE(paths.size() == 1);
  REQUIRE(paths[0].size() == 1);
  CHECK(paths[0][0].feature == 0);
  CHECK(paths[0][0].cmp == Cmp::kGreaterEqual);
  CHECK(paths[0][0].threshold == 0.0);  // midpoint of the (-1, 1) gap
  // Both leaves pure on the training data.
  for (int i = 0; i < 4; ++i) CHECK(tree.predict_row(x, i) == y[i]);
}

TEST_CASE("xor needs two levels and then fits exactly") {
  Tensor2 x(12, 2);
  std::vector<int> y;
  const double pts[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const int lab[4] = {0, 1, 1, 0};
  for (int r = 0; r < 12; ++r) {
    x.at(r, 0) = pts[r % 4][0];
    x.at(r, 1) = pts[r % 4][1];
    y.push_back(lab[r % 4]);
  }
  DecisionTree depth1 = mgb::fit_tree(x, y, 1, 1);
  DecisionTree depth2 = mgb::fit_tree(x, y, 2, 3);
  int correct1 = 0, correct2 = 0;
  for (int r = 0; r < 12; ++r) {
    correct1 += depth1.predict_row(x, r) == y[r];
    correct2 += depth2.predict_row(x, r) == y[r];
  }
  CHECK(correct1 <= 8);   // a single axis cut cannot solve xor
  CHECK(correct2 == 12);  // two levels can
}

TEST_CASE("fit is deterministic") {
  mgb::Rng rng(9);
  Tensor2 x(60, 3);
  std::vector<int> y;
  for (int r = 0; r < 60; ++r) {
    for (int c = 0; c < 3; ++c) x.at(r, c) = rng.normal();
    y.push_back(x.at(r, 1) > 0.2 ? 1 : 0);
  }
  DecisionTree a = mgb::fit_tree(x, y, 3, 5);
  DecisionTree b = mgb::fit_tree(x, y, 3, 5);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].leaf == b.nodes[i].leaf);
    CHECK(a.nodes[i].feature == b.nodes[i].feature);
    CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
    CHECK(a.nodes[i].predicted == b.nodes[i].predicted);
  }
}

TEST_CASE("min_leaf vetoes splits that would isolate tiny children") {
  Tensor2 x = column({10, 1, 2, 3, 4, 5});
  std::vector<int> y = {1, 0, 0, 0, 0, 0};
  // The only informative split isolates the single positive: forbidden.
  DecisionTree tree = mgb::fit_tree(x, y, 3, 5);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].leaf);
  CHECK(tree.nodes[0].predicted == 0);  // majority
  CHECK(mgb::positive_paths(tree).empty());
}

TEST_CASE("pure input produces a single leaf") {
  Tensor2 x = column({1, 2, 3, 4, 5, 6});
  std::vector<int> all_pos(6, 1);
  DecisionTree tree = mgb::fit_tree(x, all_pos, 3, 1);
  REQUIRE(tree.nodes.size() == 1);
  auto paths = mgb::positive_paths(tree);
  // A positive root leaf is one path with no conditions.
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].empty());
}

TEST_CASE("leaf ties go to class zero") {
  Tensor2 x = column({1, 1, 1, 1});
  std::vector<int> y = {0, 1, 0, 1};
  DecisionTree tree = mgb::fit_tree(x, y, 2, 1);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].predicted == 0);
}

TEST_CASE("fit validates inputs") {
  Tensor2 empty(0, 1);
  CHECK_THROWS(mgb::fit_tree(empty, {}, 3, 5));
  Tensor2 x = column({1, 2});
  CHECK_THROWS(mgb::fit_tree(x, {0}, 3, 5));      // size mismatch
  CHECK_THROWS(mgb::fit_tree(x, {0, 2}, 3, 5));   // labels must be 0/1
  CHECK_THROWS(mgb::fit_tree(x, {0, 1}, 0, 5));   // depth must be >= 1
  CHECK_THROWS(mgb::fit_tree(x, {0, 1}, 3, 0));   // min_leaf must be >= 1
}

TEST_CASE("every training row satisfies the conditions of its leaf path") {
  mgb::Rng rng(21);
  Tensor2 x(80, 4);
  std::vector<int> y;
  for (int r = 0; r < 80; ++r) {
    for (int c = 0; c < 4; ++c) x.at(r, c) = rng.uniform(-2, 2);
    y.push_back((x.at(r, 0) + x.at(r, 2) > 0) ? 1 : 0);
  }
  DecisionTree tree = mgb::fit_tree(x, y, 3, 5);
  auto paths = mgb::positive_paths(tree);
  for (int r = 0; r < 80; ++r) {
    if (tree.predict_row(x, r) != 1) continue;
    // The row must satisfy every condition of at least one positive path.
    bool matched_one = false;
    for (const auto& path : paths) {
      bool all = true;
      for (const auto& cond : path) {
        const double v = x.at(r, cond.feature);
        all &= (cond.cmp == Cmp::kLess) ? v < cond.threshold
                                        : v >= cond.threshold;
      }
      matched_one |= all;
    }
    CHECK(matched_one);
  }
}
