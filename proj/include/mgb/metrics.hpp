// Evaluation metrics and the flat record a single training run produces.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgb {

// Unweighted mean over classes of the per-class F1. A class with no true and
// no predicted instances (or zero precision+recall) contributes 0.
inline double macro_f1(const std::vector<int>& predictions,
                       const std::vector<int>& truths, int num_classes) {
  if (predictions.empty() || predictions.size() != truths.size()) {
    throw std::invalid_argument("macro_f1: size mismatch or empty");
  }
  if (num_classes < 2) throw std::invalid_argument("macro_f1: need >= 2 classes");
  std::vector<int> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i], t = truths[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes) {
      throw std::invalid_argument("macro_f1: class id out of range");
    }
    if (p == t) {
      tp[p] += 1;
    } else {
      fp[p] += 1;
      fn[t] += 1;
    }
  }
  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const double precision =
        tp[c] + fp[c] > 0 ? static_cast<double>(tp[c]) / (tp[c] + fp[c]) : 0.0;
    const double recall =
        tp[c] + fn[c] > 0 ? static_cast<double>(tp[c]) / (tp[c] + fn[c]) : 0.0;
    if (precision + recall > 0.0) {
      total += 2.0 * precision * recall / (precision + recall);
    }
  }
  return total / num_classes;
}

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1); 0 when n == 1
};

inline Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("aggregate: empty input");
  Aggregate a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

// One row of the results table: everything needed to regroup, aggregate and
// plot a run later.
struct RunReport {
  std::string dataset_id;
  std::string mechanism;  // mechanism tag, including any fallback markers
  std::string regime;     // "R1" or "R2"
  double mu_train = 0.0;
  double mu_test = 0.0;
  std::uint64_t seed = 0;
  std::string layer_kind;  // "gcn" | "sage" | "gin"
  int layers = 0;
  std::string imputation;  // "zero" | "mean" | "median" | "mim"
  double lr = 0.0;
  double weight_decay = 0.0;
  double test_macro_f1 = 0.0;
  double val_macro_f1 = 0.0;
  double realized_rate = 0.0;
  int epochs = 0;
  double seconds = 0.0;
};

}  // namespace mgb
