#pragma once

// Experiment protocols on top of the library primitives: seeded sweep and
// shift runners with a worker pool, result aggregation (mean/std curves and
// AUC tables), results-CSV ingestion, and the two enumeration verifiers
// behind the `verify` command.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mgb/dataset_io.hpp"
#include "mgb/graph.hpp"
#include "mgb/infotheory.hpp"
#include "mgb/mask.hpp"
#include "mgb/mechanisms.hpp"
#include "mgb/metrics.hpp"
#include "mgb/models.hpp"
#include "mgb/rng.hpp"

namespace mgb {

inline const std::vector<double> kDefaultMus = {0.0, 0.1, 0.2,  0.3, 0.4, 0.5,
                                                0.6, 0.7, 0.8, 0.9, 0.99};

struct GridAxes {
  std::vector<LayerKind> kinds = {LayerKind::kGCN, LayerKind::kSAGE,
                                  LayerKind::kGIN};
  std::vector<int> layer_counts = {1, 2, 3};
  std::vector<double> lrs = {1e-4, 1e-3, 1e-2};
  std::vector<double> weight_decays = {1e-5, 1e-4, 1e-3};
};

struct SweepOptions {
  std::string dataset_id = "dataset";
  MechanismKind mechanism = MechanismKind::kUMcar;
  std::vector<double> mus = kDefaultMus;
  std::vector<Imputation> imputations = {Imputation::kZero, Imputation::kMean,
                                         Imputation::kMedian, Imputation::kMIM};
  int num_seeds = 5;
  bool use_grid = true;  // hyperparameter search per cell vs the base config
  ModelConfig base;
  GridAxes axes;
  int jobs = 1;
  std::optional<NodeSplit> split;  // pinned split; otherwise per-seed splits
  std::array<double, 3> split_fractions = {0.6, 0.2, 0.2};
};

struct ShiftOptions {
  std::string dataset_id = "dataset";
  MechanismKind train_mechanism = MechanismKind::kFdMnar;
  double mu_train = 0.5;
  std::vector<double> mu_tests = {0.0, 0.25, 0.5};
  std::vector<Imputation> imputations = {Imputation::kZero, Imputation::kMean,
                                         Imputation::kMedian, Imputation::kMIM};
  int num_seeds = 5;
  bool use_grid = true;
  ModelConfig base;
  GridAxes axes;
  int jobs = 1;
  std::optional<NodeSplit> split;
  std::array<double, 3> split_fractions = {0.6, 0.2, 0.2};
};

struct CellFailure {
  std::size_t index = 0;     // position in the canonical cell order
  std::string description;   // cell coordinates, human-readable
  std::string message;       // exception text
};

struct SweepResult {
  std::vector<RunReport> reports;   // canonical cell order, failures omitted
  std::vector<CellFailure> failures;
};

using ProgressFn = std::function<void(const RunReport&)>;

namespace detail {

// Runs fn(0..count-1) on up to `jobs` threads. fn is responsible for its own
// domain errors; anything escaping is treated as a bug and rethrown once.
template <typename Fn>
void run_pool(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(jobs, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline NodeSplit split_for_seed(const Graph& g,
                                const std::optional<NodeSplit>& pinned,
                                const std::array<double, 3>& fractions,
                                std::uint64_t seed) {
  if (pinned) return *pinned;
  return make_split(g, fractions, SplitMode::kTransductive, seed);
}

// A natively-missing value can never be observed, whatever the generated
// mechanism says, so native markers are folded into every generated mask.
inline Mask cover_native(Mask mask, const Graph& g) {
  if (g.absent.empty()) return mask;
  bool changed = false;
  std::vector<std::uint8_t> bits = mask.bits;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (g.absent[k] && !bits[k]) {
      bits[k] = 1;
      changed = true;
    }
  }
  if (!changed) return mask;
  return Mask::from_bits(mask.rows, mask.cols, std::move(bits),
                         mask.mechanism_tag, mask.seed, mask.target_rate);
}

struct TrainOutcome {
  ModelConfig config;
  TrainedModel model;
};

inline TrainOutcome fit_cell(const Graph& g, const NodeSplit& split,
                             const Mask& mask, Imputation imputation,
                             std::uint64_t seed, bool use_grid,
                             const ModelConfig& base, const GridAxes& axes) {
  if (use_grid) {
    GridResult r = grid_search(g, split, mask, axes.kinds, axes.layer_counts,
                               axes.lrs, axes.weight_decays, imputation, seed,
                               base);
    return {r.best_config, std::move(r.best_model)};
  }
  ModelConfig c = base;
  c.imputation = imputation;
  c.seed = seed;
  TrainedModel m = train(g, split, mask, c);
  return {c, std::move(m)};
}

inline RunReport report_skeleton(const std::string& dataset_id,
                                 const TrainOutcome& fit) {
  RunReport r;
  r.dataset_id = dataset_id;
  r.layer_kind = layer_kind_name(fit.config.layer_kind);
  r.layers = fit.config.num_layers;
  r.imputation = imputation_name(fit.config.imputation);
  r.lr = fit.config.lr;
  r.weight_decay = fit.config.weight_decay;
  r.val_macro_f1 = fit.model.best_val_f1;
  r.epochs = fit.model.epochs_run;
  return r;
}

}  // namespace detail

// R1 protocol: one mask per cell, identical train and test mechanism.
inline SweepResult run_sweep(const Graph& g, const SweepOptions& opt,
                             const ProgressFn& on_report = {}) {
  validate_graph(g);
  if (opt.mus.empty() || opt.imputations.empty() || opt.num_seeds < 1) {
    throw std::invalid_argument("run_sweep: empty grid");
  }
  const std::size_t n_imps = opt.imputations.size();
  const std::size_t n_seeds = static_cast<std::size_t>(opt.num_seeds);
  const std::size_t total = opt.mus.size() * n_imps * n_seeds;

  std::vector<std::optional<RunReport>> slots(total);
  std::vector<CellFailure> failures;
  std::mutex sink_mutex;

  detail::run_pool(total, opt.jobs, [&](std::size_t i) {
    const double mu = opt.mus[i / (n_imps * n_seeds)];
    const Imputation imp = opt.imputations[(i / n_seeds) % n_imps];
    const std::uint64_t seed = i % n_seeds;
    const std::string where = "mu=" + detail::format_double(mu) +
                              " imputation=" + imputation_name(imp) +
                              " seed=" + std::to_string(seed);
    try {
      const auto started = std::chrono::steady_clock::now();
      const NodeSplit split =
          detail::split_for_seed(g, opt.split, opt.split_fractions, seed);
      MechanismSpec spec;
      spec.kind = opt.mechanism;
      spec.target_rate = mu;
      spec.seed = seed;
      const Mask mask = detail::cover_native(
          realize_regime(g, split, {Regime::kR1, spec, spec}), g);
      const auto fit = detail::fit_cell(g, split, mask, imp, seed,
                                        opt.use_grid, opt.base, opt.axes);
      RunReport r = detail::report_skeleton(opt.dataset_id, fit);
      r.mechanism = mask.mechanism_tag;
      r.regime = "R1";
      r.mu_train = mu;
      r.mu_test = mu;
      r.seed = seed;
      r.realized_rate = mask.realized_rate;
      r.test_macro_f1 = evaluate_macro_f1(fit.model, g, mask, split.test);
      r.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - started)
                      .count();
      std::lock_guard<std::mutex> lock(sink_mutex);
      slots[i] = r;
      if (on_report) on_report(r);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(sink_mutex);
      failures.push_back({i, where, e.what()});
    }
  });

  SweepResult out;
  for (auto& s : slots) {
    if (s) out.reports.push_back(std::move(*s));
  }
  std::sort(failures.begin(), failures.end(),
            [](const CellFailure& a, const CellFailure& b) {
              return a.index < b.index;
            });
  out.failures = std::move(failures);
  return out;
}

// R2 protocol: one training per (imputation, seed) on the train-mechanism
// mask; the model is then evaluated under each shifted test condition
// (test rows re-masked by U-MCAR at mu_test) and once under the matched
// train condition as the R1 reference row.
inline SweepResult run_shift(const Graph& g, const ShiftOptions& opt,
                             const ProgressFn& on_report = {}) {
  validate_graph(g);
  if (opt.mu_tests.empty() || opt.imputations.empty() || opt.num_seeds < 1) {
    throw std::invalid_argument("run_shift: empty grid");
  }
  if (opt.train_mechanism != MechanismKind::kFdMnar &&
      opt.train_mechanism != MechanismKind::kCdMnar) {
    throw std::invalid_argument(
        "run_shift: train mechanism must be fd-mnar or cd-mnar");
  }
  const std::size_t n_seeds = static_cast<std::size_t>(opt.num_seeds);
  const std::size_t units = opt.imputations.size() * n_seeds;
  const std::size_t rows_per_unit = opt.mu_tests.size() + 1;

  std::vector<std::optional<RunReport>> slots(units * rows_per_unit);
  std::vector<CellFailure> failures;
  std::mutex sink_mutex;

  detail::run_pool(units, opt.jobs, [&](std::size_t u) {
    const Imputation imp = opt.imputations[u / n_seeds];
    const std::uint64_t seed = u % n_seeds;
    const std::string where = "mu_train=" +
                              detail::format_double(opt.mu_train) +
                              " imputation=" + imputation_name(imp) +
                              " seed=" + std::to_string(seed);
    try {
      const auto started = std::chrono::steady_clock::now();
      const NodeSplit split =
          detail::split_for_seed(g, opt.split, opt.split_fractions, seed);
      MechanismSpec train_spec;
      train_spec.kind = opt.train_mechanism;
      train_spec.target_rate = opt.mu_train;
      train_spec.seed = seed;
      const Mask train_mask =
          detail::cover_native(generate_mask(g, train_spec), g);
      const auto fit = detail::fit_cell(g, split, train_mask, imp, seed,
                                        opt.use_grid, opt.base, opt.axes);
      const double train_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        started)
              .count();

      std::vector<RunReport> unit_rows;
      for (double mu_test : opt.mu_tests) {
        const auto eval_started = std::chrono::steady_clock::now();
        MechanismSpec test_spec;
        test_spec.kind = MechanismKind::kUMcar;
        test_spec.target_rate = mu_test;
        test_spec.seed = seed;
        const Mask shifted = detail::cover_native(
            realize_regime(g, split, {Regime::kR2, train_spec, test_spec}), g);
        RunReport r = detail::report_skeleton(opt.dataset_id, fit);
        r.mechanism = shifted.mechanism_tag;
        r.regime = "R2";
        r.mu_train = opt.mu_train;
        r.mu_test = mu_test;
        r.seed = seed;
        r.realized_rate = shifted.realized_rate;
        r.test_macro_f1 = evaluate_macro_f1(fit.model, g, shifted, split.test);
        r.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - eval_started)
                        .count();
        unit_rows.push_back(std::move(r));
      }
      RunReport ref = detail::report_skeleton(opt.dataset_id, fit);
      ref.mechanism = train_mask.mechanism_tag;
      ref.regime = "R1";
      ref.mu_train = opt.mu_train;
      ref.mu_test = opt.mu_train;
      ref.seed = seed;
      ref.realized_rate = train_mask.realized_rate;
      ref.test_macro_f1 = evaluate_macro_f1(fit.model, g, train_mask, split.test);
      ref.seconds = train_seconds;
      unit_rows.push_back(std::move(ref));

      std::lock_guard<std::mutex> lock(sink_mutex);
      for (std::size_t k = 0; k < unit_rows.size(); ++k) {
        if (on_report) on_report(unit_rows[k]);
        slots[u * rows_per_unit + k] = std::move(unit_rows[k]);
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(sink_mutex);
      failures.push_back({u * rows_per_unit, where, e.what()});
    }
  });

  SweepResult out;
  for (auto& s : slots) {
    if (s) out.reports.push_back(std::move(*s));
  }
  std::sort(failures.begin(), failures.end(),
            [](const CellFailure& a, const CellFailure& b) {
              return a.index < b.index;
            });
  out.failures = std::move(failures);
  return out;
}

// --- aggregation ----------------------------------------------------------

namespace detail {

inline int imputation_rank(const std::string& name) {
  static const char* kOrder[] = {"zero", "mean", "median", "mim"};
  for (int i = 0; i < 4; ++i) {
    if (name == kOrder[i]) return i;
  }
  return 4;
}

inline bool imputation_before(const std::string& a, const std::string& b) {
  const int ra = imputation_rank(a), rb = imputation_rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

}  // namespace detail

struct MuStat {
  double mu = 0.0;
  std::string imputation;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;  // sample standard deviation over seeds
  int n = 0;
};

// Groups reports by (mu_test, imputation); rows come back sorted by mu then
// canonical imputation order (zero, mean, median, mim, then others).
inline std::vector<MuStat> summarize_by_mu(const std::vector<RunReport>& rs) {
  std::map<std::pair<double, std::string>, std::vector<double>> cells;
  for (const auto& r : rs) {
    cells[{r.mu_test, r.imputation}].push_back(r.test_macro_f1);
  }
  std::vector<MuStat> out;
  for (const auto& [key, f1s] : cells) {
    MuStat s;
    s.mu = key.first;
    s.imputation = key.second;
    s.n = static_cast<int>(f1s.size());
    double sum = 0.0;
    for (double v : f1s) sum += v;
    s.mean_f1 = sum / s.n;
    if (s.n >= 2) {
      double ss = 0.0;
      for (double v : f1s) ss += (v - s.mean_f1) * (v - s.mean_f1);
      s.std_f1 = std::sqrt(ss / (s.n - 1));
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const MuStat& a, const MuStat& b) {
    if (a.mu != b.mu) return a.mu < b.mu;
    return detail::imputation_before(a.imputation, b.imputation);
  });
  return out;
}

// Area under the F1-vs-mu curve, trapezoidal, normalized by the mu span so a
// flat curve's AUC equals its level and a single point is its own AUC.
inline double auc_over_mu(std::vector<std::pair<double, double>> pts) {
  if (pts.empty()) throw std::invalid_argument("auc_over_mu: no points");
  std::sort(pts.begin(), pts.end());
  const double span = pts.back().first - pts.front().first;
  if (pts.size() == 1 || span <= 0.0) {
    double sum = 0.0;
    for (const auto& p : pts) sum += p.second;
    return sum / pts.size();
  }
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) *
            (pts[i].second + pts[i - 1].second) / 2.0;
  }
  return area / span;
}

struct AucTable {
  std::vector<std::string> mechanisms;   // columns, sorted
  std::vector<std::string> imputations;  // rows, canonical order
  std::vector<std::vector<double>> values;  // [row][col], NaN where absent
};

inline AucTable auc_table(const std::vector<RunReport>& rs) {
  // (mechanism, imputation, mu) -> seed F1s.
  std::map<std::tuple<std::string, std::string, double>, std::vector<double>>
      cells;
  for (const auto& r : rs) {
    cells[{r.mechanism, r.imputation, r.mu_test}].push_back(r.test_macro_f1);
  }
  AucTable t;
  for (const auto& [key, _] : cells) {
    const auto& [mech, imp, mu] = key;
    (void)mu;
    if (std::find(t.mechanisms.begin(), t.mechanisms.end(), mech) ==
        t.mechanisms.end()) {
      t.mechanisms.push_back(mech);
    }
    if (std::find(t.imputations.begin(), t.imputations.end(), imp) ==
        t.imputations.end()) {
      t.imputations.push_back(imp);
    }
  }
  std::sort(t.mechanisms.begin(), t.mechanisms.end());
  std::sort(t.imputations.begin(), t.imputations.end(),
            detail::imputation_before);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t.values.assign(t.imputations.size(),
                  std::vector<double>(t.mechanisms.size(), nan));
  for (std::size_t i = 0; i < t.imputations.size(); ++i) {
    for (std::size_t j = 0; j < t.mechanisms.size(); ++j) {
      std::vector<std::pair<double, double>> curve;
      for (const auto& [key, f1s] : cells) {
        if (std::get<0>(key) != t.mechanisms[j] ||
            std::get<1>(key) != t.imputations[i]) {
          continue;
        }
        double sum = 0.0;
        for (double v : f1s) sum += v;
        curve.emplace_back(std::get<2>(key), sum / f1s.size());
      }
      if (!curve.empty()) t.values[i][j] = auc_over_mu(std::move(curve));
    }
  }
  return t;
}

// --- persistence helpers ---------------------------------------------------

// Appends reports with wall-clock timing zeroed so repeated runs with the
// same seeds produce byte-identical files.
inline void append_reports(const std::vector<RunReport>& rs,
                           const std::string& path) {
  for (RunReport r : rs) {
    r.seconds = 0.0;
    append_results(r, path);
  }
}

inline std::vector<RunReport> read_results(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || lines[0] != kResultsHeader) {
    throw std::runtime_error("read_results: schema mismatch in " + path);
  }
  std::vector<RunReport> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = detail::split_csv(lines[k]);
    if (cells.size() != 16) {
      throw std::runtime_error("read_results: malformed row " +
                               std::to_string(k) + " in " + path);
    }
    RunReport r;
    r.dataset_id = cells[0];
    r.mechanism = cells[1];
    r.regime = cells[2];
    r.mu_train = detail::parse_double_strict(cells[3], "results");
    r.mu_test = detail::parse_double_strict(cells[4], "results");
    r.seed = static_cast<std::uint64_t>(
        detail::parse_int_strict(cells[5], "results"));
    r.layer_kind = cells[6];
    r.layers =
        static_cast<int>(detail::parse_int_strict(cells[7], "results"));
    r.imputation = cells[8];
    r.lr = detail::parse_double_strict(cells[9], "results");
    r.weight_decay = detail::parse_double_strict(cells[10], "results");
    r.test_macro_f1 = detail::parse_double_strict(cells[11], "results");
    r.val_macro_f1 = detail::parse_double_strict(cells[12], "results");
    r.realized_rate = detail::parse_double_strict(cells[13], "results");
    r.epochs =
        static_cast<int>(detail::parse_int_strict(cells[14], "results"));
    r.seconds = detail::parse_double_strict(cells[15], "results");
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_summary_csv(const std::vector<MuStat>& stats,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_summary_csv: cannot open " + path);
  out << "mu,imputation,mean_f1,std_f1\n";
  for (const auto& s : stats) {
    out << detail::format_double(s.mu) << ',' << s.imputation << ','
        << detail::format_double(s.mean_f1) << ','
        << detail::format_double(s.std_f1) << '\n';
  }
}

inline void write_auc_csv(const AucTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_auc_csv: cannot open " + path);
  out << "imputation";
  for (const auto& m : t.mechanisms) out << ',' << m;
  out << '\n';
  for (std::size_t i = 0; i < t.imputations.size(); ++i) {
    out << t.imputations[i];
    for (std::size_t j = 0; j < t.mechanisms.size(); ++j) {
      out << ',';
      if (!std::isnan(t.values[i][j])) {
        out << detail::format_double(t.values[i][j]);
      }
    }
    out << '\n';
  }
}

struct PlotGroup {
  std::string dataset_id;
  std::string mechanism;
  std::vector<MuStat> rows;
};

inline std::vector<PlotGroup> group_plot_data(
    const std::vector<RunReport>& rs) {
  std::map<std::pair<std::string, std::string>, std::vector<RunReport>> groups;
  for (const auto& r : rs) {
    groups[{r.dataset_id, r.mechanism}].push_back(r);
  }
  std::vector<PlotGroup> out;
  for (const auto& [key, members] : groups) {
    out.push_back({key.first, key.second, summarize_by_mu(members)});
  }
  return out;
}

namespace detail {
inline std::string sanitize_filename(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}
}  // namespace detail

// One curve CSV per (dataset, mechanism) plus the overall AUC matrix.
// Returns the written paths; the matrix is always last.
inline std::vector<std::string> write_plot_data(
    const std::vector<RunReport>& rs, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::vector<std::string> written;
  for (const auto& grp : group_plot_data(rs)) {
    const std::string name =
        detail::sanitize_filename(grp.dataset_id + "_" + grp.mechanism) +
        ".csv";
    const std::string path = (fs::path(out_dir) / name).string();
    write_summary_csv(grp.rows, path);
    written.push_back(path);
  }
  const std::string auc_path =
      (fs::path(out_dir) / "auc_matrix.csv").string();
  write_auc_csv(auc_table(rs), auc_path);
  written.push_back(auc_path);
  return written;
}

// --- enumeration verifiers -------------------------------------------------

struct VerifyOptions {
  int trials = 200;
  int max_cells = 4;      // n*d ceiling for enumerated tables
  std::uint64_t seed = 0;
  double tolerance = -1.0;  // negative = verifier-specific default
};

struct VerifyOutcome {
  int passed = 0;
  int failed = 0;
  // Bound verifier: smallest margin inside the sandwich (>= -tol passes).
  // Ignorability verifier: largest discrepancy seen (<= tol passes).
  double worst_slack = 0.0;
  std::string first_failure;
  // Ignorability only: the label-dependent control must visibly break.
  double negative_control_discrepancy = 0.0;
  bool negative_control_ok = false;

  bool all_ok() const { return failed == 0 && negative_control_ok; }
};

namespace detail {

inline std::pair<int, int> random_dims(Rng& rng, int max_cells) {
  std::vector<std::pair<int, int>> dims;
  for (int n = 1; n <= max_cells; ++n) {
    for (int d = 1; n * d <= max_cells; ++d) dims.emplace_back(n, d);
  }
  return dims[static_cast<std::size_t>(rng.integer(dims.size()))];
}

}  // namespace detail

// Exhaustive check that uniform masking can only destroy label information,
// and never more than the binary-entropy bound allows.
inline VerifyOutcome verify_masking_bound(const VerifyOptions& opt) {
  if (opt.max_cells < 1 || opt.max_cells > 6) {
    throw std::invalid_argument("verify: max_cells must be 1..6");
  }
  const double tol = opt.tolerance < 0.0 ? 1e-9 : opt.tolerance;
  static const double kMuGrid[] = {0.1, 0.2, 0.3, 0.4, 0.5,
                                   0.6, 0.7, 0.8, 0.9};
  VerifyOutcome out;
  out.worst_slack = std::numeric_limits<double>::infinity();
  out.negative_control_ok = true;  // no control in this mode
  for (int t = 0; t < opt.trials; ++t) {
    Rng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(t) * 2 + 1));
    const auto [n, d] = detail::random_dims(rng, opt.max_cells);
    const int classes = 2 + static_cast<int>(rng.integer(2));
    const JointTable table = JointTable::random_joint(n, d, classes, rng);
    const double mu = kMuGrid[t % 9];
    const MaskingBoundResult r = check_masking_bound(table, mu);
    const double slack = std::min(-r.delta, r.delta - r.lower_bound);
    out.worst_slack = std::min(out.worst_slack, slack);
    if (r.within(tol)) {
      ++out.passed;
    } else {
      ++out.failed;
      if (out.first_failure.empty()) {
        out.first_failure = "trial " + std::to_string(t) + ": delta=" +
                            detail::format_double(r.delta) + " bound=" +
                            detail::format_double(r.lower_bound);
      }
    }
  }
  if (opt.trials == 0) out.worst_slack = 0.0;
  return out;
}

// Exhaustive check that value-blind, label-blind missingness drops out of the
// label posterior, with a label-dependent counterexample as negative control.
inline VerifyOutcome verify_ignorability(const VerifyOptions& opt) {
  if (opt.max_cells < 1 || opt.max_cells > 6) {
    throw std::invalid_argument("verify: max_cells must be 1..6");
  }
  const double tol = opt.tolerance < 0.0 ? 1e-10 : opt.tolerance;
  VerifyOutcome out;
  for (int t = 0; t < opt.trials; ++t) {
    Rng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(t) * 2 + 1));
    const auto [n, d] = detail::random_dims(rng, opt.max_cells);
    const int classes = 2 + static_cast<int>(rng.integer(2));
    const JointTable table =
        JointTable::random_ignorable(n, d, classes, rng);
    const IgnorabilityResult r = check_ignorability(table);
    out.worst_slack = std::max(out.worst_slack, r.max_discrepancy);
    if (r.max_discrepancy <= tol) {
      ++out.passed;
    } else {
      ++out.failed;
      if (out.first_failure.empty()) {
        out.first_failure =
            "trial " + std::to_string(t) +
            ": discrepancy=" + detail::format_double(r.max_discrepancy);
      }
    }
  }
  const IgnorabilityResult control =
      check_ignorability(JointTable::label_dependent_counterexample());
  out.negative_control_discrepancy = control.max_discrepancy;
  out.negative_control_ok = control.max_discrepancy > 1e-3;
  return out;
}

}  // namespace mgb
