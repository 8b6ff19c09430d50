// mgb: dataset generation, mechanism sweeps, shift grids, enumeration
// verifiers, and plot-data emission for the missing-feature GNN benchmark.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgb/dataset_io.hpp"
#include "mgb/experiment.hpp"
#include "mgb/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int default_jobs() {
  if (const char* env = std::getenv("MGB_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    std::cerr << "warning: ignoring invalid MGB_JOBS='" << env << "'\n";
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::string dataset_id_from(const std::string& dir) {
  std::string s = dir;
  while (s.size() > 1 && s.back() == '/') s.pop_back();
  const std::string name = fs::path(s).filename().string();
  return name.empty() ? s : name;
}

std::vector<double> parse_double_list(const std::string& csv,
                                      const char* what) {
  std::vector<double> out;
  for (const auto& cell : mgb::detail::split_csv(csv)) {
    out.push_back(mgb::detail::parse_double_strict(cell, what));
  }
  return out;
}

std::vector<mgb::Imputation> parse_imputations(const std::string& csv) {
  std::vector<mgb::Imputation> out;
  for (const auto& cell : mgb::detail::split_csv(csv)) {
    out.push_back(mgb::imputation_from_name(cell));
  }
  return out;
}

json load_config(const std::string& path,
                 const std::vector<std::string>& known_keys) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json cfg = json::parse(in);
  if (!cfg.is_object()) throw std::runtime_error("config must be an object");
  for (const auto& [key, _] : cfg.items()) {
    if (std::find(known_keys.begin(), known_keys.end(), key) ==
        known_keys.end()) {
      throw std::runtime_error("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

void reject_unknown_keys(const json& obj, const char* where,
                         const std::vector<std::string>& known_keys) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known_keys.begin(), known_keys.end(), key) ==
        known_keys.end()) {
      throw std::runtime_error("unknown config key '" + std::string(where) +
                               "." + key + "'");
    }
  }
}

// Model/base-config and grid-axes overrides shared by sweep and shift.
void apply_model_config(const json& cfg, mgb::ModelConfig* base,
                        mgb::GridAxes* axes) {
  if (cfg.contains("model")) {
    const json& m = cfg.at("model");
    reject_unknown_keys(m, "model",
                        {"layer_kind", "num_layers", "hidden_dim", "lr",
                         "weight_decay", "max_epochs", "patience"});
    if (m.contains("layer_kind")) {
      base->layer_kind = mgb::layer_kind_from_name(m.at("layer_kind"));
    }
    if (m.contains("num_layers")) base->num_layers = m.at("num_layers");
    if (m.contains("hidden_dim")) base->hidden_dim = m.at("hidden_dim");
    if (m.contains("lr")) base->lr = m.at("lr");
    if (m.contains("weight_decay")) base->weight_decay = m.at("weight_decay");
    if (m.contains("max_epochs")) base->max_epochs = m.at("max_epochs");
    if (m.contains("patience")) base->patience = m.at("patience");
  }
  if (cfg.contains("grid_axes")) {
    const json& a = cfg.at("grid_axes");
    reject_unknown_keys(a, "grid_axes",
                        {"kinds", "layers", "lrs", "weight_decays"});
    if (a.contains("kinds")) {
      axes->kinds.clear();
      for (const auto& k : a.at("kinds")) {
        axes->kinds.push_back(mgb::layer_kind_from_name(k));
      }
    }
    if (a.contains("layers")) {
      axes->layer_counts = a.at("layers").get<std::vector<int>>();
    }
    if (a.contains("lrs")) {
      axes->lrs = a.at("lrs").get<std::vector<double>>();
    }
    if (a.contains("weight_decays")) {
      axes->weight_decays = a.at("weight_decays").get<std::vector<double>>();
    }
  }
}

// Loads the graph; native missing cells (if any) stay missing under every
// generated mask. Returns the pinned split when the directory carries one.
struct LoadedForRuns {
  mgb::Graph graph;
  std::optional<mgb::NodeSplit> split;
};

LoadedForRuns load_for_runs(const std::string& dir) {
  LoadedForRuns out;
  auto loaded = mgb::load_dataset(dir);
  out.graph = std::move(loaded.graph);
  const fs::path split_path = fs::path(dir) / "split.json";
  if (fs::exists(split_path)) {
    out.split = mgb::load_split(split_path.string());
    std::cerr << "using pinned split from " << split_path.string() << "\n";
  }
  return out;
}

void print_failures(const std::vector<mgb::CellFailure>& failures) {
  for (const auto& f : failures) {
    std::cerr << "cell failed (" << f.description << "): " << f.message
              << "\n";
  }
}

void print_auc_table(const mgb::AucTable& t) {
  std::printf("AUC of mean test macro-F1 over mu:\n");
  std::printf("%-12s", "imputation");
  for (const auto& m : t.mechanisms) std::printf(" %16s", m.c_str());
  std::printf("\n");
  for (std::size_t i = 0; i < t.imputations.size(); ++i) {
    std::printf("%-12s", t.imputations[i].c_str());
    for (std::size_t j = 0; j < t.mechanisms.size(); ++j) {
      if (std::isnan(t.values[i][j])) {
        std::printf(" %16s", "-");
      } else {
        std::printf(" %16.4f", t.values[i][j]);
      }
    }
    std::printf("\n");
  }
}

void write_run_artifacts(const mgb::SweepResult& res,
                         const std::string& out_path) {
  mgb::append_reports(res.reports, out_path);
  const fs::path out(out_path);
  const fs::path stem = out.parent_path() / out.stem();
  mgb::write_summary_csv(mgb::summarize_by_mu(res.reports),
                         stem.string() + "_summary.csv");
  mgb::write_auc_csv(mgb::auc_table(res.reports), stem.string() + "_auc.csv");
  std::printf("wrote %zu rows to %s (+ %s_summary.csv, %s_auc.csv)\n",
              res.reports.size(), out_path.c_str(), stem.c_str(),
              stem.c_str());
  print_auc_table(mgb::auc_table(res.reports));
}

mgb::ProgressFn stderr_progress(const char* label) {
  return [label](const mgb::RunReport& r) {
    std::fprintf(stderr,
                 "[%s] %s %s mu_train=%g mu_test=%g seed=%llu %s "
                 "f1=%.4f (%d epochs, %.1fs)\n",
                 label, r.mechanism.c_str(), r.regime.c_str(), r.mu_train,
                 r.mu_test, static_cast<unsigned long long>(r.seed),
                 r.imputation.c_str(), r.test_macro_f1, r.epochs, r.seconds);
  };
}

// --- subcommands -----------------------------------------------------------

int cmd_gen(const std::string& preset, const std::string& out_dir,
            std::uint64_t seed, bool force) {
  if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force) {
    throw std::runtime_error("output directory " + out_dir +
                             " is not empty (use --force to overwrite)");
  }
  mgb::Graph g;
  std::optional<mgb::NodeSplit> split;
  if (preset == "synthetic") {
    g = mgb::generate_synthetic(1000, 5, 2, seed);
  } else if (preset == "s2") {
    g = mgb::generate_scaled(mgb::ScaledPreset::kS2, seed);
  } else if (preset == "s3") {
    g = mgb::generate_scaled(mgb::ScaledPreset::kS3, seed);
  } else if (preset == "s4") {
    g = mgb::generate_scaled(mgb::ScaledPreset::kS4, seed);
  } else if (preset == "inductive") {
    auto [graph, s] = mgb::generate_inductive(800, 200, 5, seed);
    g = std::move(graph);
    split = s;
  } else {
    throw std::runtime_error("unknown preset '" + preset + "'");
  }
  mgb::save_dataset(g, out_dir);
  if (split) {
    mgb::save_split(*split, (fs::path(out_dir) / "split.json").string());
  }
  std::printf("preset=%s n=%d d=%d classes=%d edges=%zu sparsity=%.4f\n",
              preset.c_str(), g.n, g.d, g.num_classes, g.edges.size(),
              mgb::feature_sparsity(g));
  return 0;
}

int cmd_verify(int theorem, int trials, int max_cells, std::uint64_t seed,
               double tolerance) {
  mgb::VerifyOptions opt;
  opt.trials = trials;
  opt.max_cells = max_cells;
  opt.seed = seed;
  opt.tolerance = tolerance;
  if (trials == 0) {
    std::cerr << "warning: --trials 0 checks nothing beyond the negative "
                 "control; pass is vacuous\n";
  }
  if (theorem == 2) {
    const auto out = mgb::verify_masking_bound(opt);
    std::printf(
        "masking-bound oracle: %d/%d tables within tolerance "
        "(worst slack %.3e)\n",
        out.passed, opt.trials, out.worst_slack);
    if (out.failed > 0) std::printf("first failure: %s\n",
                                    out.first_failure.c_str());
    return out.all_ok() ? 0 : 1;
  }
  const auto out = mgb::verify_ignorability(opt);
  std::printf(
      "ignorability oracle: %d/%d tables agree "
      "(worst discrepancy %.3e)\n",
      out.passed, opt.trials, out.worst_slack);
  std::printf("negative control (label-dependent): discrepancy %.3e %s\n",
              out.negative_control_discrepancy,
              out.negative_control_ok ? "(detects the violation)"
                                      : "(FAILED to detect)");
  if (out.failed > 0) std::printf("first failure: %s\n",
                                  out.first_failure.c_str());
  return out.all_ok() ? 0 : 1;
}

int cmd_plot_data(const std::string& results_path, const std::string& out_dir) {
  const auto reports = mgb::read_results(results_path);
  if (reports.empty()) {
    std::cerr << "warning: " << results_path
              << " has no data rows; nothing to write\n";
    return 0;
  }
  const auto files = mgb::write_plot_data(reports, out_dir);
  std::printf("grouped %zu rows into %zu files:\n", reports.size(),
              files.size());
  for (const auto& f : files) std::printf("  %s\n", f.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"missing-feature GNN benchmark toolkit"};
  app.require_subcommand(1);

  // gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a dataset directory");
  std::string gen_preset, gen_out, gen_config;
  std::uint64_t gen_seed = 0;
  bool gen_force = false;
  gen->add_option("--preset", gen_preset, "synthetic|s2|s3|s4|inductive")
      ->check(CLI::IsMember({"synthetic", "s2", "s3", "s4", "inductive"}));
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_flag("--force", gen_force, "overwrite a non-empty directory");
  gen->add_option("--config", gen_config, "JSON config file");

  // sweep ----------------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "sweep", "R1 protocol: same mechanism at train and test");
  std::string sw_data, sw_mechanism, sw_mus, sw_imps, sw_grid = "default";
  std::string sw_out = "results.csv", sw_config;
  int sw_seeds = 5, sw_jobs = default_jobs();
  sweep->add_option("--data", sw_data, "dataset directory");
  sweep->add_option("--mechanism", sw_mechanism,
                    "u-mcar|s-mcar|ld-mcar|fd-mnar|cd-mnar");
  sweep->add_option("--mus", sw_mus, "comma-separated target rates");
  sweep->add_option("--imputations", sw_imps,
                    "comma-separated from zero,mean,median,mim");
  sweep->add_option("--seeds", sw_seeds, "number of seeds (0..N-1)");
  sweep->add_option("--grid", sw_grid, "default|none")
      ->check(CLI::IsMember({"default", "none"}));
  sweep->add_option("--out", sw_out, "results CSV to append to");
  sweep->add_option("--jobs", sw_jobs, "worker threads");
  sweep->add_option("--config", sw_config, "JSON config file");

  // shift ----------------------------------------------------------------
  auto* shift = app.add_subcommand(
      "shift", "R2 protocol: MNAR training mask, U-MCAR test conditions");
  std::string sh_data, sh_mech, sh_mutests, sh_imps, sh_grid = "default";
  std::string sh_out = "results.csv", sh_config;
  double sh_mu_train = 0.5;
  int sh_seeds = 5, sh_jobs = default_jobs();
  shift->add_option("--data", sh_data, "dataset directory");
  shift->add_option("--train-mech", sh_mech, "fd-mnar|cd-mnar")
      ->check(CLI::IsMember({"fd-mnar", "cd-mnar"}));
  shift->add_option("--mu-train", sh_mu_train, "training missingness rate");
  shift->add_option("--mu-tests", sh_mutests, "comma-separated test rates");
  shift->add_option("--imputations", sh_imps,
                    "comma-separated from zero,mean,median,mim");
  shift->add_option("--seeds", sh_seeds, "number of seeds (0..N-1)");
  shift->add_option("--grid", sh_grid, "default|none")
      ->check(CLI::IsMember({"default", "none"}));
  shift->add_option("--out", sh_out, "results CSV to append to");
  shift->add_option("--jobs", sh_jobs, "worker threads");
  shift->add_option("--config", sh_config, "JSON config file");

  // verify ----------------------------------------------------------------
  auto* verify = app.add_subcommand(
      "verify", "enumeration oracles for the two analytical claims");
  int vf_theorem = 0, vf_trials = 200, vf_cells = 4;
  std::uint64_t vf_seed = 0;
  double vf_tol = -1.0;
  std::string vf_config;
  verify->add_option("--theorem", vf_theorem,
                     "1 = ignorability, 2 = masking bound")
      ->check(CLI::IsMember({1, 2}));
  verify->add_option("--trials", vf_trials, "random tables to enumerate");
  verify->add_option("--max-cells", vf_cells, "n*d ceiling per table");
  verify->add_option("--seed", vf_seed, "trial seed");
  verify->add_option("--tolerance", vf_tol, "override the default tolerance");
  verify->add_option("--config", vf_config, "JSON config file");

  // plot-data --------------------------------------------------------------
  auto* plot = app.add_subcommand(
      "plot-data", "aggregate a results CSV into plottable curves");
  std::string pl_results, pl_out, pl_config;
  plot->add_option("--results", pl_results, "results CSV");
  plot->add_option("--out", pl_out, "output directory");
  plot->add_option("--config", pl_config, "JSON config file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const json cfg =
          load_config(gen_config, {"preset", "out", "seed", "force"});
      if (cfg.contains("preset") && !gen->count("--preset"))
        gen_preset = cfg.at("preset");
      if (cfg.contains("out") && !gen->count("--out"))
        gen_out = cfg.at("out");
      if (cfg.contains("seed") && !gen->count("--seed"))
        gen_seed = cfg.at("seed");
      if (cfg.contains("force") && !gen->count("--force"))
        gen_force = cfg.at("force");
      if (gen_preset.empty()) throw std::runtime_error("--preset is required");
      if (gen_out.empty()) throw std::runtime_error("--out is required");
      return cmd_gen(gen_preset, gen_out, gen_seed, gen_force);
    }

    if (sweep->parsed()) {
      const json cfg = load_config(
          sw_config, {"data", "mechanism", "mus", "imputations", "seeds",
                      "grid", "out", "jobs", "model", "grid_axes"});
      if (cfg.contains("data") && !sweep->count("--data"))
        sw_data = cfg.at("data");
      if (cfg.contains("mechanism") && !sweep->count("--mechanism"))
        sw_mechanism = cfg.at("mechanism");
      if (cfg.contains("seeds") && !sweep->count("--seeds"))
        sw_seeds = cfg.at("seeds");
      if (cfg.contains("grid") && !sweep->count("--grid"))
        sw_grid = cfg.at("grid");
      if (cfg.contains("out") && !sweep->count("--out"))
        sw_out = cfg.at("out");
      if (cfg.contains("jobs") && !sweep->count("--jobs"))
        sw_jobs = cfg.at("jobs");
      if (sw_data.empty()) throw std::runtime_error("--data is required");
      if (sw_mechanism.empty())
        throw std::runtime_error("--mechanism is required");

      mgb::SweepOptions opt;
      opt.dataset_id = dataset_id_from(sw_data);
      opt.mechanism = mgb::mechanism_from_name(sw_mechanism);
      if (sweep->count("--mus")) {
        opt.mus = parse_double_list(sw_mus, "--mus");
      } else if (cfg.contains("mus")) {
        opt.mus = cfg.at("mus").get<std::vector<double>>();
      }
      if (sweep->count("--imputations")) {
        opt.imputations = parse_imputations(sw_imps);
      } else if (cfg.contains("imputations")) {
        opt.imputations.clear();
        for (const auto& name : cfg.at("imputations")) {
          opt.imputations.push_back(mgb::imputation_from_name(name));
        }
      }
      opt.num_seeds = sw_seeds;
      opt.use_grid = sw_grid == "default";
      opt.jobs = sw_jobs;
      apply_model_config(cfg, &opt.base, &opt.axes);

      LoadedForRuns data = load_for_runs(sw_data);
      opt.split = data.split;
      const auto res =
          mgb::run_sweep(data.graph, opt, stderr_progress("sweep"));
      write_run_artifacts(res, sw_out);
      print_failures(res.failures);
      return res.failures.empty() ? 0 : 1;
    }

    if (shift->parsed()) {
      const json cfg = load_config(
          sh_config, {"data", "train_mech", "mu_train", "mu_tests",
                      "imputations", "seeds", "grid", "out", "jobs", "model",
                      "grid_axes"});
      if (cfg.contains("data") && !shift->count("--data"))
        sh_data = cfg.at("data");
      if (cfg.contains("train_mech") && !shift->count("--train-mech"))
        sh_mech = cfg.at("train_mech");
      if (cfg.contains("mu_train") && !shift->count("--mu-train"))
        sh_mu_train = cfg.at("mu_train");
      if (cfg.contains("seeds") && !shift->count("--seeds"))
        sh_seeds = cfg.at("seeds");
      if (cfg.contains("grid") && !shift->count("--grid"))
        sh_grid = cfg.at("grid");
      if (cfg.contains("out") && !shift->count("--out"))
        sh_out = cfg.at("out");
      if (cfg.contains("jobs") && !shift->count("--jobs"))
        sh_jobs = cfg.at("jobs");
      if (sh_data.empty()) throw std::runtime_error("--data is required");
      if (sh_mech.empty()) throw std::runtime_error("--train-mech is required");

      mgb::ShiftOptions opt;
      opt.dataset_id = dataset_id_from(sh_data);
      opt.train_mechanism = mgb::mechanism_from_name(sh_mech);
      opt.mu_train = sh_mu_train;
      if (shift->count("--mu-tests")) {
        opt.mu_tests = parse_double_list(sh_mutests, "--mu-tests");
      } else if (cfg.contains("mu_tests")) {
        opt.mu_tests = cfg.at("mu_tests").get<std::vector<double>>();
      }
      if (shift->count("--imputations")) {
        opt.imputations = parse_imputations(sh_imps);
      } else if (cfg.contains("imputations")) {
        opt.imputations.clear();
        for (const auto& name : cfg.at("imputations")) {
          opt.imputations.push_back(mgb::imputation_from_name(name));
        }
      }
      opt.num_seeds = sh_seeds;
      opt.use_grid = sh_grid == "default";
      opt.jobs = sh_jobs;
      apply_model_config(cfg, &opt.base, &opt.axes);

      LoadedForRuns data = load_for_runs(sh_data);
      opt.split = data.split;
      const auto res =
          mgb::run_shift(data.graph, opt, stderr_progress("shift"));
      write_run_artifacts(res, sh_out);
      print_failures(res.failures);
      return res.failures.empty() ? 0 : 1;
    }

    if (verify->parsed()) {
      const json cfg = load_config(
          vf_config, {"theorem", "trials", "max_cells", "seed", "tolerance"});
      if (cfg.contains("theorem") && !verify->count("--theorem"))
        vf_theorem = cfg.at("theorem");
      if (cfg.contains("trials") && !verify->count("--trials"))
        vf_trials = cfg.at("trials");
      if (cfg.contains("max_cells") && !verify->count("--max-cells"))
        vf_cells = cfg.at("max_cells");
      if (cfg.contains("seed") && !verify->count("--seed"))
        vf_seed = cfg.at("seed");
      if (cfg.contains("tolerance") && !verify->count("--tolerance"))
        vf_tol = cfg.at("tolerance");
      if (vf_theorem != 1 && vf_theorem != 2) {
        throw std::runtime_error("--theorem must be 1 or 2");
      }
      return cmd_verify(vf_theorem, vf_trials, vf_cells, vf_seed, vf_tol);
    }

    if (plot->parsed()) {
      const json cfg = load_config(pl_config, {"results", "out"});
      if (cfg.contains("results") && !plot->count("--results"))
        pl_results = cfg.at("results");
      if (cfg.contains("out") && !plot->count("--out"))
        pl_out = cfg.at("out");
      if (pl_results.empty()) throw std::runtime_error("--results is required");
      if (pl_out.empty()) throw std::runtime_error("--out is required");
      return cmd_plot_data(pl_results, pl_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
