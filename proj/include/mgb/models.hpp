#pragma once

// Graph encoders (spectral convolution, neighborhood-mean concatenation,
// sum aggregation with a two-layer MLP), the imputation front-ends, full-
// batch training with early stopping, grid search, prediction, and model
// serialization.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgb/autodiff.hpp"
#include "mgb/graph.hpp"
#include "mgb/mask.hpp"
#include "mgb/metrics.hpp"
#include "mgb/rng.hpp"
#include "mgb/tensor.hpp"

namespace mgb {

enum class LayerKind { kGCN, kSAGE, kGIN };
enum class Imputation { kZero, kMean, kMedian, kMIM };

inline std::string layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kGCN: return "gcn";
    case LayerKind::kSAGE: return "sage";
    case LayerKind::kGIN: return "gin";
  }
  throw std::invalid_argument("unknown layer kind");
}

inline LayerKind layer_kind_from_name(const std::string& s) {
  if (s == "gcn") return LayerKind::kGCN;
  if (s == "sage") return LayerKind::kSAGE;
  if (s == "gin") return LayerKind::kGIN;
  throw std::invalid_argument("unknown layer kind: " + s);
}

inline std::string imputation_name(Imputation i) {
  switch (i) {
    case Imputation::kZero: return "zero";
    case Imputation::kMean: return "mean";
    case Imputation::kMedian: return "median";
    case Imputation::kMIM: return "mim";
  }
  throw std::invalid_argument("unknown imputation");
}

inline Imputation imputation_from_name(const std::string& s) {
  if (s == "zero") return Imputation::kZero;
  if (s == "mean") return Imputation::kMean;
  if (s == "median") return Imputation::kMedian;
  if (s == "mim") return Imputation::kMIM;
  throw std::invalid_argument("unknown imputation: " + s);
}

struct ModelConfig {
  LayerKind layer_kind = LayerKind::kGCN;
  int num_layers = 2;
  int hidden_dim = 64;
  Imputation imputation = Imputation::kZero;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  int max_epochs = 500;
  int patience = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_layers < 1 || num_layers > 3)
      throw std::invalid_argument("config: num_layers must be 1..3");
    if (hidden_dim < 1) throw std::invalid_argument("config: hidden_dim >= 1");
    if (!(lr >= 1e-4 && lr <= 1e-2))
      throw std::invalid_argument("config: lr must be in [1e-4, 1e-2]");
    if (!(weight_decay >= 1e-5 && weight_decay <= 1e-3))
      throw std::invalid_argument("config: weight_decay must be in [1e-5, 1e-3]");
    if (max_epochs < 1) throw std::invalid_argument("config: max_epochs >= 1");
    if (patience < 1) throw std::invalid_argument("config: patience >= 1");
  }
};

struct TrainedModel {
  ModelConfig config;
  int input_width = 0;   // d, or 2d for the indicator-augmented strategy
  int output_width = 0;  // number of classes
  std::vector<Tensor2> params;  // layer-major, shapes per layer_param_shapes
  double best_val_f1 = 0.0;
  int epochs_run = 0;
};

// Feature matrix each strategy actually feeds the encoder.
inline Tensor2 build_model_input(const Tensor2& features, const Mask& mask,
                                 Imputation imp) {
  switch (imp) {
    case Imputation::kZero: return apply_zero_pad(features, mask);
    case Imputation::kMean:
      return apply_column_statistic(features, mask, ColumnStatistic::kMean);
    case Imputation::kMedian:
      return apply_column_statistic(features, mask, ColumnStatistic::kMedian);
    case Imputation::kMIM: return mim_augment(features, mask);
  }
  throw std::invalid_argument("unknown imputation");
}

// The fixed message-passing matrix each encoder multiplies by.
inline Tensor2 make_operator(const Graph& g, LayerKind kind) {
  switch (kind) {
    case LayerKind::kGCN: return normalized_adjacency(g);
    case LayerKind::kSAGE: {
      // Row-normalized adjacency without self-loops; an isolated node
      // keeps a zero row (its neighborhood mean is the zero vector).
      auto adj = adjacency_lists(g);
      Tensor2 p(g.n, g.n);
      for (int i = 0; i < g.n; ++i) {
        if (adj[i].empty()) continue;
        const double w = 1.0 / static_cast<double>(adj[i].size());
        for (int j : adj[i]) p.at(i, j) = w;
      }
      return p;
    }
    case LayerKind::kGIN: {
      Tensor2 m = Tensor2::identity(g.n);
      for (auto [a, b] : g.edges) {
        m.at(a, b) = 1.0;
        m.at(b, a) = 1.0;
      }
      return m;
    }
  }
  throw std::invalid_argument("unknown layer kind");
}

// Parameter tensor shapes for one layer mapping width `in` to width `out`.
inline std::vector<std::pair<int, int>> layer_param_shapes(LayerKind kind,
                                                           int in, int out) {
  switch (kind) {
    case LayerKind::kGCN:
      return {{in, out}, {1, out}};
    case LayerKind::kSAGE:
      return {{2 * in, out}, {1, out}};
    case LayerKind::kGIN:
      // Two-layer MLP applied after sum aggregation.
      return {{in, out}, {1, out}, {out, out}, {1, out}};
  }
  throw std::invalid_argument("unknown layer kind");
}

inline std::size_t params_per_layer(LayerKind kind) {
  return kind == LayerKind::kGIN ? 4 : 2;
}

// One encoder layer on the tape. `params` holds the ValueIds in the order
// given by layer_param_shapes. Hidden layers are rectified; the final
// layer emits raw logits.
inline ValueId layer_forward(Tape& t, LayerKind kind, ValueId h, ValueId op,
                             const std::vector<ValueId>& params,
                             bool final_layer) {
  if (params.size() != params_per_layer(kind)) {
    throw std::invalid_argument("layer_forward: wrong parameter count");
  }
  ValueId z;
  switch (kind) {
    case LayerKind::kGCN:
      z = t.add_row_bias(t.matmul(t.matmul(op, h), params[0]), params[1]);
      break;
    case LayerKind::kSAGE: {
      ValueId mixed = t.concat_cols(h, t.matmul(op, h));
      z = t.add_row_bias(t.matmul(mixed, params[0]), params[1]);
      break;
    }
    case LayerKind::kGIN: {
      ValueId summed = t.matmul(op, h);
      ValueId z1 = t.relu(t.add_row_bias(t.matmul(summed, params[0]), params[1]));
      z = t.add_row_bias(t.matmul(z1, params[2]), params[3]);
      break;
    }
    default:
      throw std::invalid_argument("unknown layer kind");
  }
  return final_layer ? z : t.relu(z);
}

namespace detail {

inline std::vector<std::pair<int, int>> all_param_shapes(const ModelConfig& cfg,
                                                         int input_width,
                                                         int num_classes) {
  std::vector<std::pair<int, int>> shapes;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const int in = l == 0 ? input_width : cfg.hidden_dim;
    const int out = l == cfg.num_layers - 1 ? num_classes : cfg.hidden_dim;
    auto s = layer_param_shapes(cfg.layer_kind, in, out);
    shapes.insert(shapes.end(), s.begin(), s.end());
  }
  return shapes;
}

// Uniform Glorot weights, zero biases (a bias tensor is any with one row
// that is not the first tensor of its layer group -- simpler: shapes with
// rows == 1 are biases).
inline std::vector<Tensor2> init_params(const ModelConfig& cfg, int input_width,
                                        int num_classes) {
  Rng rng(mix_seed(cfg.seed, 0x61093u));
  std::vector<Tensor2> params;
  for (auto [r, c] : all_param_shapes(cfg, input_width, num_classes)) {
    Tensor2 p(r, c);
    if (r > 1) {
      const double a = std::sqrt(6.0 / (static_cast<double>(r) + c));
      for (double& v : p.data) v = (2.0 * rng.uniform() - 1.0) * a;
    }
    params.push_back(std::move(p));
  }
  return params;
}

// Stack every layer; returns the logits id.
inline ValueId forward_on_tape(Tape& t, const ModelConfig& cfg, ValueId x,
                               ValueId op, const std::vector<ValueId>& param_ids) {
  const std::size_t per = params_per_layer(cfg.layer_kind);
  ValueId h = x;
  for (int l = 0; l < cfg.num_layers; ++l) {
    std::vector<ValueId> slice(param_ids.begin() + l * per,
                               param_ids.begin() + (l + 1) * per);
    h = layer_forward(t, cfg.layer_kind, h, op, slice,
                      l == cfg.num_layers - 1);
  }
  return h;
}

inline std::vector<int> argmax_rows(const Tensor2& logits) {
  std::vector<int> out(logits.rows);
  for (int i = 0; i < logits.rows; ++i) {
    int best = 0;
    for (int j = 1; j < logits.cols; ++j) {
      if (logits.at(i, j) > logits.at(i, best)) best = j;  // ties keep lowest
    }
    out[i] = best;
  }
  return out;
}

}  // namespace detail

// Full forward pass of a trained (or hand-built) model; returns all-node
// logits.
inline Tensor2 forward_logits(const TrainedModel& m, const Graph& g,
                              const Mask& mask) {
  Tensor2 x = build_model_input(g.features, mask, m.config.imputation);
  if (x.cols != m.input_width) {
    throw std::invalid_argument("predict: input width " + std::to_string(x.cols) +
                                " does not match trained width " +
                                std::to_string(m.input_width));
  }
  Tape t;
  ValueId xid = t.input(std::move(x));
  ValueId op = t.input(make_operator(g, m.config.layer_kind));
  std::vector<ValueId> ids;
  for (const Tensor2& p : m.params) ids.push_back(t.input(p));
  ValueId logits = detail::forward_on_tape(t, m.config, xid, op, ids);
  return t.value(logits);
}

inline std::vector<int> predict(const TrainedModel& m, const Graph& g,
                                const Mask& mask) {
  return detail::argmax_rows(forward_logits(m, g, mask));
}

inline double evaluate_macro_f1(const TrainedModel& m, const Graph& g,
                                const Mask& mask, const std::vector<int>& ids) {
  Tensor2 logits = forward_logits(m, g, mask);
  std::vector<int> preds, truths;
  auto all = detail::argmax_rows(logits);
  for (int i : ids) {
    preds.push_back(all[i]);
    truths.push_back(g.labels[i]);
  }
  return macro_f1(preds, truths, g.num_classes);
}

// Full-batch training with early stopping on validation macro-F1. The
// validation score of an epoch is computed from the same forward pass that
// produced the gradients, so the snapshot taken at the best epoch is
// exactly the parameter set that achieved that score.
inline TrainedModel train(const Graph& g, const NodeSplit& split,
                          const Mask& mask, const ModelConfig& cfg) {
  cfg.validate();
  if (split.train.empty() || split.val.empty()) {
    throw std::invalid_argument("train: empty train or validation split");
  }
  Tensor2 x = build_model_input(g.features, mask, cfg.imputation);
  const int c = g.num_classes;

  std::vector<int> train_labels, val_labels;
  for (int i : split.train) train_labels.push_back(g.labels[i]);
  for (int i : split.val) val_labels.push_back(g.labels[i]);

  Tensor2 op = make_operator(g, cfg.layer_kind);
  std::vector<Tensor2> params = detail::init_params(cfg, x.cols, c);
  std::vector<AdamState> states(params.size());

  TrainedModel best;
  best.config = cfg;
  best.input_width = x.cols;
  best.output_width = c;
  best.best_val_f1 = -1.0;

  int since_improvement = 0;
  int epoch = 0;
  while (epoch < cfg.max_epochs) {
    ++epoch;
    Tape t;
    ValueId xid = t.input(x);
    ValueId opid = t.input(op);
    std::vector<ValueId> ids;
    for (const Tensor2& p : params) ids.push_back(t.param(p));
    ValueId logits = detail::forward_on_tape(t, cfg, xid, opid, ids);
    ValueId sel = t.gather_rows(logits, split.train);
    ValueId loss = t.cross_entropy_mean(sel, train_labels);
    const double loss_value = t.value(loss).at(0, 0);
    if (!std::isfinite(loss_value)) {
      throw std::runtime_error(
          "train: non-finite loss at epoch " + std::to_string(epoch) + " (" +
          layer_kind_name(cfg.layer_kind) + ", layers=" +
          std::to_string(cfg.num_layers) + ", lr=" + std::to_string(cfg.lr) + ")");
    }

    // Validation score of the parameters used in this forward pass.
    std::vector<int> val_preds;
    const Tensor2& lg = t.value(logits);
    for (int i : split.val) {
      int arg = 0;
      for (int j = 1; j < lg.cols; ++j) {
        if (lg.at(i, j) > lg.at(i, arg)) arg = j;
      }
      val_preds.push_back(arg);
    }
    const double val_f1 = macro_f1(val_preds, val_labels, c);
    if (val_f1 > best.best_val_f1) {
      best.best_val_f1 = val_f1;
      best.params = params;
      since_improvement = 0;
    } else {
      ++since_improvement;
      if (since_improvement >= cfg.patience) break;
    }

    t.backward(loss);
    try {
      for (std::size_t k = 0; k < params.size(); ++k) {
        adam_step(params[k], t.grad(ids[k]), states[k], cfg.lr, 0.9, 0.999,
                  1e-8, cfg.weight_decay);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(
          "train: " + std::string(e.what()) + " at epoch " +
          std::to_string(epoch) + " (" + layer_kind_name(cfg.layer_kind) +
          ", layers=" + std::to_string(cfg.num_layers) +
          ", lr=" + std::to_string(cfg.lr) + ")");
    }
  }
  best.epochs_run = epoch;
  return best;
}

struct GridResult {
  ModelConfig best_config;
  TrainedModel best_model;
  std::vector<std::string> failures;  // diagnostics of skipped cells
};

namespace detail {

inline int layer_kind_rank(LayerKind k) {
  switch (k) {
    case LayerKind::kGCN: return 0;
    case LayerKind::kSAGE: return 1;
    case LayerKind::kGIN: return 2;
  }
  return 3;
}

// Canonical preference order for equal validation scores.
inline bool config_preferred(const ModelConfig& a, const ModelConfig& b) {
  if (a.num_layers != b.num_layers) return a.num_layers < b.num_layers;
  if (a.lr != b.lr) return a.lr < b.lr;
  if (a.weight_decay != b.weight_decay) return a.weight_decay < b.weight_decay;
  return layer_kind_rank(a.layer_kind) < layer_kind_rank(b.layer_kind);
}

}  // namespace detail

inline GridResult grid_search(const Graph& g, const NodeSplit& split,
                              const Mask& mask,
                              const std::vector<LayerKind>& kinds,
                              const std::vector<int>& layer_counts,
                              const std::vector<double>& lrs,
                              const std::vector<double>& weight_decays,
                              Imputation imputation, std::uint64_t seed,
                              const ModelConfig& base = ModelConfig{}) {
  if (kinds.empty() || layer_counts.empty() || lrs.empty() || weight_decays.empty()) {
    throw std::invalid_argument("grid_search: empty grid axis");
  }
  GridResult result;
  bool have_best = false;
  for (LayerKind kind : kinds) {
    for (int layers : layer_counts) {
      for (double lr : lrs) {
        for (double wd : weight_decays) {
          ModelConfig cfg = base;
          cfg.layer_kind = kind;
          cfg.num_layers = layers;
          cfg.lr = lr;
          cfg.weight_decay = wd;
          cfg.imputation = imputation;
          cfg.seed = seed;
          try {
            TrainedModel m = train(g, split, mask, cfg);
            const bool wins =
                !have_best || m.best_val_f1 > result.best_model.best_val_f1 ||
                (m.best_val_f1 == result.best_model.best_val_f1 &&
                 detail::config_preferred(cfg, result.best_config));
            if (wins) {
              result.best_config = cfg;
              result.best_model = std::move(m);
              have_best = true;
            }
          } catch (const std::exception& e) {
            result.failures.push_back(
                layer_kind_name(kind) + "/layers=" + std::to_string(layers) +
                "/lr=" + std::to_string(lr) + "/wd=" + std::to_string(wd) +
                ": " + e.what());
          }
        }
      }
    }
  }
  if (!have_best) {
    throw std::runtime_error("grid_search: every cell failed (" +
                             std::to_string(result.failures.size()) +
                             " failures)");
  }
  return result;
}

// --- serialization -----------------------------------------------------
// Single file: magic, 8-byte little-endian header length, JSON header,
// then the raw float64 parameter blob in layer-major order.

namespace detail {
inline constexpr char kModelMagic[8] = {'M', 'G', 'B', 'M', '0', '0', '0', '1'};
}

inline void save_model(const TrainedModel& m, const std::string& path) {
  nlohmann::json h;
  h["config"] = {{"layer_kind", layer_kind_name(m.config.layer_kind)},
                 {"num_layers", m.config.num_layers},
                 {"hidden_dim", m.config.hidden_dim},
                 {"imputation", imputation_name(m.config.imputation)},
                 {"lr", m.config.lr},
                 {"weight_decay", m.config.weight_decay},
                 {"max_epochs", m.config.max_epochs},
                 {"patience", m.config.patience},
                 {"seed", m.config.seed}};
  h["input_width"] = m.input_width;
  h["output_width"] = m.output_width;
  h["best_val_f1"] = m.best_val_f1;
  h["epochs_run"] = m.epochs_run;
  auto& shapes = h["shapes"] = nlohmann::json::array();
  for (const Tensor2& p : m.params) {
    shapes.push_back({p.rows, p.cols});
  }
  const std::string header = h.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out.write(detail::kModelMagic, sizeof(detail::kModelMagic));
  const std::uint64_t len = header.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.write(lenbuf, 8);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const Tensor2& p : m.params) {
    out.write(reinterpret_cast<const char*>(p.data.data()),
              static_cast<std::streamsize>(p.data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kModelMagic, 8) != 0) {
    throw std::runtime_error("load_model: bad magic in " + path);
  }
  char lenbuf[8];
  in.read(lenbuf, 8);
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) {
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(lenbuf[i])) << (8 * i);
  }
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("load_model: truncated header in " + path);
  nlohmann::json h = nlohmann::json::parse(header);

  TrainedModel m;
  const auto& c = h.at("config");
  m.config.layer_kind = layer_kind_from_name(c.at("layer_kind").get<std::string>());
  m.config.num_layers = c.at("num_layers").get<int>();
  m.config.hidden_dim = c.at("hidden_dim").get<int>();
  m.config.imputation = imputation_from_name(c.at("imputation").get<std::string>());
  m.config.lr = c.at("lr").get<double>();
  m.config.weight_decay = c.at("weight_decay").get<double>();
  m.config.max_epochs = c.at("max_epochs").get<int>();
  m.config.patience = c.at("patience").get<int>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.input_width = h.at("input_width").get<int>();
  m.output_width = h.at("output_width").get<int>();
  m.best_val_f1 = h.at("best_val_f1").get<double>();
  m.epochs_run = h.at("epochs_run").get<int>();
  for (const auto& s : h.at("shapes")) {
    Tensor2 p(s.at(0).get<int>(), s.at(1).get<int>());
    in.read(reinterpret_cast<char*>(p.data.data()),
            static_cast<std::streamsize>(p.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("load_model: truncated blob in " + path);
    m.params.push_back(std::move(p));
  }
  return m;
}

}  // namespace mgb
