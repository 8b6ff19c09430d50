// Missingness mask over a feature matrix (bit = 1 means the entry is
// missing) and the three imputation front-ends the models consume: zero
// padding, observed-column statistics, and indicator augmentation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgb/tensor.hpp"

namespace mgb {

struct Mask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> bits;  // row-major, 1 = missing
  double realized_rate = 0.0;      // mean of bits
  double target_rate = 0.0;        // rate the generator aimed for
  std::string mechanism_tag;
  std::uint64_t seed = 0;

  static Mask from_bits(int rows, int cols, std::vector<std::uint8_t> bits,
                        std::string mechanism_tag, std::uint64_t seed,
                        double target_rate = 0.0) {
    if (rows <= 0 || cols <= 0) {
      throw std::invalid_argument("mask: non-positive shape");
    }
    if (bits.size() != static_cast<std::size_t>(rows) * cols) {
      throw std::invalid_argument("mask: bit count does not match shape");
    }
    std::size_t ones = 0;
    for (std::uint8_t b : bits) {
      if (b > 1) throw std::invalid_argument("mask: bits must be 0 or 1");
      ones += b;
    }
    Mask m;
    m.rows = rows;
    m.cols = cols;
    m.bits = std::move(bits);
    m.realized_rate = static_cast<double>(ones) / static_cast<double>(m.bits.size());
    m.target_rate = target_rate;
    m.mechanism_tag = std::move(mechanism_tag);
    m.seed = seed;
    return m;
  }

  bool missing(int i, int j) const {
    return bits[static_cast<std::size_t>(i) * cols + j] != 0;
  }
};

namespace detail {
inline void check_mask_shape(const Tensor2& f, const Mask& m) {
  if (f.rows != m.rows || f.cols != m.cols) {
    throw std::invalid_argument("mask/feature shape mismatch");
  }
}
}  // namespace detail

// Masked entries become 0; observed entries pass through untouched.
inline Tensor2 apply_zero_pad(const Tensor2& features, const Mask& mask) {
  detail::check_mask_shape(features, mask);
  Tensor2 out = features;
  for (int i = 0; i < out.rows; ++i) {
    for (int j = 0; j < out.cols; ++j) {
      if (mask.missing(i, j)) out.at(i, j) = 0.0;
    }
  }
  return out;
}

enum class ColumnStatistic { kMean, kMedian };

// Masked entries take the per-column statistic of the observed entries in
// that column. A fully masked column has no observed entries and fills 0.
inline Tensor2 apply_column_statistic(const Tensor2& features, const Mask& mask,
                                      ColumnStatistic stat) {
  detail::check_mask_shape(features, mask);
  Tensor2 out = features;
  for (int j = 0; j < features.cols; ++j) {
    std::vector<double> observed;
    observed.reserve(features.rows);
    for (int i = 0; i < features.rows; ++i) {
      if (!mask.missing(i, j)) observed.push_back(features.at(i, j));
    }
    double fill = 0.0;
    if (!observed.empty()) {
      if (stat == ColumnStatistic::kMean) {
        double s = 0.0;
        for (double v : observed) s += v;
        fill = s / static_cast<double>(observed.size());
      } else {
        // Lower-interpolation median: sorted index ceil(0.5*k) - 1.
        std::sort(observed.begin(), observed.end());
        const auto k = observed.size();
        const auto idx = (k + 1) / 2 - 1;
        fill = observed[idx];
      }
    }
    for (int i = 0; i < features.rows; ++i) {
      if (mask.missing(i, j)) out.at(i, j) = fill;
    }
  }
  return out;
}

// Missing-indicator augmentation: [zero_pad(X) | M], an n x 2d matrix whose
// right half is the mask itself as 0/1 columns.
inline Tensor2 mim_augment(const Tensor2& features, const Mask& mask) {
  detail::check_mask_shape(features, mask);
  Tensor2 out(features.rows, 2 * features.cols);
  for (int i = 0; i < features.rows; ++i) {
    for (int j = 0; j < features.cols; ++j) {
      out.at(i, j) = mask.missing(i, j) ? 0.0 : features.at(i, j);
      out.at(i, features.cols + j) = mask.missing(i, j) ? 1.0 : 0.0;
    }
  }
  return out;
}

// --- serialization ---------------------------------------------------------
// <base>.csv holds the 0/1 bit matrix; <base>.json holds the metadata.

inline void save_mask(const Mask& m, const std::string& base_path) {
  std::ofstream csv(base_path + ".csv");
  if (!csv) throw std::runtime_error("save_mask: cannot open " + base_path);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      csv << (m.missing(i, j) ? '1' : '0') << (j + 1 < m.cols ? "," : "");
    }
    csv << '\n';
  }
  nlohmann::json meta = {{"mechanism_tag", m.mechanism_tag},
                         {"seed", m.seed},
                         {"realized_rate", m.realized_rate},
                         {"target_rate", m.target_rate},
                         {"rows", m.rows},
                         {"cols", m.cols}};
  std::ofstream js(base_path + ".json");
  js << meta.dump(2) << '\n';
}

inline Mask load_mask(const std::string& base_path) {
  std::ifstream js(base_path + ".json");
  if (!js) throw std::runtime_error("load_mask: cannot open " + base_path + ".json");
  nlohmann::json meta = nlohmann::json::parse(js);
  std::ifstream csv(base_path + ".csv");
  if (!csv) throw std::runtime_error("load_mask: cannot open " + base_path + ".csv");
  std::vector<std::uint8_t> bits;
  std::string line;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell != "0" && cell != "1") {
        throw std::runtime_error("load_mask: bit cell must be 0 or 1");
      }
      bits.push_back(cell == "1" ? 1 : 0);
    }
  }
  Mask m = Mask::from_bits(meta.at("rows").get<int>(), meta.at("cols").get<int>(),
                           std::move(bits), meta.at("mechanism_tag").get<std::string>(),
                           meta.at("seed").get<std::uint64_t>(),
                           meta.value("target_rate", 0.0));
  // Sanity: the sidecar rate must agree with the bits.
  const double recorded = meta.at("realized_rate").get<double>();
  if (std::abs(recorded - m.realized_rate) > 1e-12) {
    throw std::runtime_error("load_mask: sidecar rate disagrees with bits");
  }
  return m;
}

}  // namespace mgb
