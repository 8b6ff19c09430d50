// Greedy binary classification tree (Gini impurity, axis-aligned midpoint
// splits). Deliberately small and fully deterministic: candidate splits are
// scanned in (feature, threshold) order and ties keep the earliest
// candidate, so refitting the same data reproduces the same tree. The
// class-dependent missingness mechanism consumes the root-to-leaf condition
// paths of the positive leaves.
#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mgb/tensor.hpp"

namespace mgb {

enum class Cmp { kLess, kGreaterEqual };

struct TreeCondition {
  int feature = 0;
  Cmp cmp = Cmp::kLess;
  double threshold = 0.0;
};

struct TreeNode {
  bool leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;   // rows with value < threshold
  int right = -1;  // rows with value >= threshold
  int predicted = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int predict_row(const Tensor2& x, int row) const {
    int cur = 0;
    while (!nodes[cur].leaf) {
      const TreeNode& nd = nodes[cur];
      cur = x.at(row, nd.feature) < nd.threshold ? nd.left : nd.right;
    }
    return nodes[cur].predicted;
  }
};

namespace detail {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

inline double gini(int pos, int total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(pos) / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

inline SplitChoice best_split(const Tensor2& x, const std::vector<int>& y,
                              const std::vector<int>& rows, int min_leaf) {
  const int total = static_cast<int>(rows.size());
  int total_pos = 0;
  for (int r : rows) total_pos += y[r];
  const double parent = gini(total_pos, total);

  SplitChoice best;
  std::vector<std::pair<double, int>> order(rows.size());
  for (int j = 0; j < x.cols; ++j) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      order[k] = {x.at(rows[k], j), y[rows[k]]};
    }
    std::sort(order.begin(), order.end());
    // Sweep the sorted column; candidate thresholds are midpoints between
    // consecutive distinct values.
    int left_n = 0, left_pos = 0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      left_n += 1;
      left_pos += order[k].second;
      if (order[k].first == order[k + 1].first) continue;
      const int right_n = total - left_n;
      if (left_n < min_leaf || right_n < min_leaf) continue;
      const int right_pos = total_pos - left_pos;
      const double child =
          (left_n * gini(left_pos, left_n) + right_n * gini(right_pos, right_n)) /
          total;
      const double gain = parent - child;
      // Strictly better wins; near-ties keep the earlier (lower feature,
      // lower threshold) candidate. Zero-gain splits of an impure node are
      // allowed — parity-style data has no first cut with positive gain.
      if (!best.found || gain > best.gain + 1e-12) {
        best.found = true;
        best.feature = j;
        best.threshold = 0.5 * (order[k].first + order[k + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

inline int build(const Tensor2& x, const std::vector<int>& y,
                 const std::vector<int>& rows, int depth, int max_depth,
                 int min_leaf, DecisionTree* tree) {
  const int id = static_cast<int>(tree->nodes.size());
  tree->nodes.emplace_back();

  int pos = 0;
  for (int r : rows) pos += y[r];
  const int neg = static_cast<int>(rows.size()) - pos;
  tree->nodes[id].predicted = pos > neg ? 1 : 0;  // majority, ties -> 0

  if (depth >= max_depth || pos == 0 || neg == 0) return id;
  SplitChoice s = best_split(x, y, rows, min_leaf);
  if (!s.found) return id;

  std::vector<int> left_rows, right_rows;
  for (int r : rows) {
    (x.at(r, s.feature) < s.threshold ? left_rows : right_rows).push_back(r);
  }
  tree->nodes[id].leaf = false;
  tree->nodes[id].feature = s.feature;
  tree->nodes[id].threshold = s.threshold;
  const int l = build(x, y, left_rows, depth + 1, max_depth, min_leaf, tree);
  tree->nodes[id].left = l;
  const int r = build(x, y, right_rows, depth + 1, max_depth, min_leaf, tree);
  tree->nodes[id].right = r;
  return id;
}

inline void collect_paths(const DecisionTree& tree, int id,
                          std::vector<TreeCondition>* prefix,
                          std::vector<std::vector<TreeCondition>>* out) {
  const TreeNode& nd = tree.nodes[id];
  if (nd.leaf) {
    if (nd.predicted == 1) out->push_back(*prefix);
    return;
  }
  prefix->push_back({nd.feature, Cmp::kLess, nd.threshold});
  collect_paths(tree, nd.left, prefix, out);
  prefix->back() = {nd.feature, Cmp::kGreaterEqual, nd.threshold};
  collect_paths(tree, nd.right, prefix, out);
  prefix->pop_back();
}

}  // namespace detail

inline DecisionTree fit_tree(const Tensor2& x, const std::vector<int>& y,
                             int max_depth = 3, int min_leaf = 5) {
  if (x.rows == 0 || x.cols == 0) {
    throw std::invalid_argument("fit_tree: empty data");
  }
  if (static_cast<int>(y.size()) != x.rows) {
    throw std::invalid_argument("fit_tree: label count mismatch");
  }
  for (int v : y) {
    if (v != 0 && v != 1) {
      throw std::invalid_argument("fit_tree: labels must be 0/1");
    }
  }
  if (max_depth < 1) throw std::invalid_argument("fit_tree: max_depth >= 1");
  if (min_leaf < 1) throw std::invalid_argument("fit_tree: min_leaf >= 1");

  std::vector<int> rows(x.rows);
  for (int r = 0; r < x.rows; ++r) rows[r] = r;
  DecisionTree tree;
  detail::build(x, y, rows, 0, max_depth, min_leaf, &tree);
  return tree;
}

// Root-to-leaf condition lists of every leaf predicting class 1. A positive
// root leaf yields one empty list; a tree with no positive leaf yields none.
inline std::vector<std::vector<TreeCondition>> positive_paths(
    const DecisionTree& tree) {
  std::vector<std::vector<TreeCondition>> out;
  std::vector<TreeCondition> prefix;
  detail::collect_paths(tree, 0, &prefix, &out);
  return out;
}

}  // namespace mgb
