// Scalar statistics used across the toolkit: binary entropy (nats), a
// plug-in binned mutual-information estimate, the lower-interpolation
// empirical quantile, and the range-normalized area under an F1-vs-rate
// curve.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mgb {

// h2(u) = -u ln u - (1-u) ln(1-u), with h2(0) = h2(1) = 0.
inline double binary_entropy(double u) {
  if (u < 0.0 || u > 1.0) {
    throw std::invalid_argument("binary_entropy: argument outside [0,1]");
  }
  if (u == 0.0 || u == 1.0) return 0.0;
  return -u * std::log(u) - (1.0 - u) * std::log(1.0 - u);
}

// Empirical quantile, lower-interpolation convention: the element at sorted
// index ceil(tau * k) - 1 (0-based, clamped).
inline double quantile(std::vector<double> values, double tau) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  if (tau < 0.0 || tau > 1.0) {
    throw std::invalid_argument("quantile: tau outside [0,1]");
  }
  std::sort(values.begin(), values.end());
  const auto k = static_cast<double>(values.size());
  long idx = static_cast<long>(std::ceil(tau * k)) - 1;
  idx = std::clamp<long>(idx, 0, static_cast<long>(values.size()) - 1);
  return values[idx];
}

// Plug-in mutual information (nats) between a real column and integer
// labels after equal-frequency binning of the column. The bin count is
// min(bins, number of distinct values); when every distinct value gets its
// own bin the estimate is exact on the empirical joint, which also makes it
// invariant under strictly monotone transforms.
inline double mi_binned(const std::vector<double>& column,
                        const std::vector<int>& labels, int bins = 10) {
  if (column.empty() || column.size() != labels.size()) {
    throw std::invalid_argument("mi_binned: size mismatch or empty");
  }
  if (bins < 1) throw std::invalid_argument("mi_binned: bins must be >= 1");
  const std::size_t k = column.size();

  std::vector<double> sorted = column;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<int> bin_of(k);
  int nbins;
  if (static_cast<int>(distinct.size()) <= bins) {
    nbins = static_cast<int>(distinct.size());
    for (std::size_t i = 0; i < k; ++i) {
      bin_of[i] = static_cast<int>(
          std::lower_bound(distinct.begin(), distinct.end(), column[i]) -
          distinct.begin());
    }
  } else {
    nbins = bins;
    // Breakpoints at equal-frequency positions; ties share a side.
    std::vector<double> edges;
    for (int b = 1; b < bins; ++b) {
      edges.push_back(sorted[k * b / bins]);
    }
    for (std::size_t i = 0; i < k; ++i) {
      bin_of[i] = static_cast<int>(
          std::upper_bound(edges.begin(), edges.end(), column[i]) -
          edges.begin());
    }
  }

  int nclasses = 0;
  for (int y : labels) {
    if (y < 0) throw std::invalid_argument("mi_binned: negative label");
    nclasses = std::max(nclasses, y + 1);
  }

  std::vector<double> joint(static_cast<std::size_t>(nbins) * nclasses, 0.0);
  std::vector<double> pb(nbins, 0.0), py(nclasses, 0.0);
  const double w = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    joint[static_cast<std::size_t>(bin_of[i]) * nclasses + labels[i]] += w;
    pb[bin_of[i]] += w;
    py[labels[i]] += w;
  }
  double mi = 0.0;
  for (int b = 0; b < nbins; ++b) {
    for (int y = 0; y < nclasses; ++y) {
      const double p = joint[static_cast<std::size_t>(b) * nclasses + y];
      if (p > 0.0) mi += p * std::log(p / (pb[b] * py[y]));
    }
  }
  return std::max(mi, 0.0);
}

// Area under a piecewise-linear F1 curve over missing rates, normalized by
// the rate range so a constant curve maps to its constant value. Points are
// (mu, f1) with mu strictly increasing inside [0,1]; at least two required.
inline double auc_f1_curve(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) {
    throw std::invalid_argument("auc_f1_curve: need at least two points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].first < 0.0 || points[i].first > 1.0) {
      throw std::invalid_argument("auc_f1_curve: mu outside [0,1]");
    }
    if (i > 0 && points[i].first <= points[i - 1].first) {
      throw std::invalid_argument("auc_f1_curve: mu not strictly increasing");
    }
  }
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double dx = points[i].first - points[i - 1].first;
    area += 0.5 * (points[i].second + points[i - 1].second) * dx;
  }
  return area / (points.back().first - points.front().first);
}

}  // namespace mgb
