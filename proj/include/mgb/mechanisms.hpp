#pragma once

// Missingness mechanisms. Every generator returns a Mask over the full
// feature matrix plus a human-readable tag; "!suffix" markers on the tag
// record degenerate inputs the generator had to work around.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgb/cart.hpp"
#include "mgb/graph.hpp"
#include "mgb/mask.hpp"
#include "mgb/rng.hpp"
#include "mgb/stats.hpp"
#include "mgb/tensor.hpp"

namespace mgb {

enum class MechanismKind { kUMcar, kSMcar, kLdMcar, kFdMnar, kCdMnar };

inline std::string mechanism_name(MechanismKind k) {
  switch (k) {
    case MechanismKind::kUMcar: return "u-mcar";
    case MechanismKind::kSMcar: return "s-mcar";
    case MechanismKind::kLdMcar: return "ld-mcar";
    case MechanismKind::kFdMnar: return "fd-mnar";
    case MechanismKind::kCdMnar: return "cd-mnar";
  }
  throw std::invalid_argument("unknown mechanism kind");
}

inline MechanismKind mechanism_from_name(const std::string& s) {
  if (s == "u-mcar") return MechanismKind::kUMcar;
  if (s == "s-mcar") return MechanismKind::kSMcar;
  if (s == "ld-mcar") return MechanismKind::kLdMcar;
  if (s == "fd-mnar") return MechanismKind::kFdMnar;
  if (s == "cd-mnar") return MechanismKind::kCdMnar;
  throw std::invalid_argument("unknown mechanism name: " + s);
}

struct MechanismSpec {
  MechanismKind kind = MechanismKind::kUMcar;
  double target_rate = 0.0;
  double tau = 0.75;         // quantile threshold (feature-dependent)
  double hi_lo_ratio = 4.0;  // conditional rate ratio (both MNAR kinds)
  int tree_depth = 3;        // rule-extraction depth (class-dependent)
  std::uint64_t seed = 0;

  void validate() const {
    if (!(target_rate >= 0.0 && target_rate <= 1.0))
      throw std::invalid_argument("mechanism target_rate must be in [0,1]");
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("mechanism tau must be in (0,1)");
    if (!(hi_lo_ratio >= 1.0))
      throw std::invalid_argument("mechanism hi_lo_ratio must be >= 1");
    if (tree_depth < 1)
      throw std::invalid_argument("mechanism tree_depth must be >= 1");
  }

  bool same_mechanism(const MechanismSpec& o) const {
    return kind == o.kind && target_rate == o.target_rate && tau == o.tau &&
           hi_lo_ratio == o.hi_lo_ratio && tree_depth == o.tree_depth &&
           seed == o.seed;
  }
};

enum class Regime { kR1, kR2 };

inline std::string regime_name(Regime r) {
  return r == Regime::kR1 ? "R1" : "R2";
}

struct RegimeSpec {
  Regime regime = Regime::kR1;
  MechanismSpec train;
  MechanismSpec test;

  void validate() const {
    train.validate();
    test.validate();
    if (regime == Regime::kR1 && !train.same_mechanism(test))
      throw std::invalid_argument(
          "matched-condition regime requires identical train/test mechanisms");
  }
};

// --- uniform MCAR: iid Bernoulli(mu) over every entry -----------------

inline Mask gen_umcar(int rows, int cols, double mu, std::uint64_t seed) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu out of range");
  Rng rng(mix_seed(seed, 0xA11CEu));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(rows) * cols, 0);
  for (auto& b : bits) b = rng.bernoulli(mu) ? 1 : 0;
  return Mask::from_bits(rows, cols, std::move(bits), "u-mcar", seed, mu);
}

// --- structured MCAR: exactly round(mu*n) rows fully masked -----------

inline Mask gen_smcar(int rows, int cols, double mu, std::uint64_t seed) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu out of range");
  const int k = static_cast<int>(std::llround(mu * rows));
  std::vector<int> order(rows);
  for (int i = 0; i < rows; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x50C1A1u));
  shuffle(order, rng);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(rows) * cols, 0);
  for (int t = 0; t < k; ++t) {
    for (int j = 0; j < cols; ++j) {
      bits[static_cast<std::size_t>(order[t]) * cols + j] = 1;
    }
  }
  return Mask::from_bits(rows, cols, std::move(bits), "s-mcar", seed, mu);
}

// --- label-dependent MCAR ---------------------------------------------
// Stage (a): allocate per-column rates p_j = clamp(rho * mi_j, 0, 1) with
// rho chosen by bisection so mean_j p_j = mu. Stage (b): value-blind
// Bernoulli sampling given those rates.

struct RateAllocation {
  std::vector<double> probs;
  bool saturated_shortfall = false;  // even full saturation missed mu
};

inline RateAllocation ldmcar_allocate(const std::vector<double>& mi, double mu) {
  if (mi.empty()) throw std::invalid_argument("allocate: no columns");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu out of range");
  RateAllocation out;
  out.probs.assign(mi.size(), 0.0);
  if (mu == 0.0) return out;

  auto mean_at = [&](double rho) {
    double s = 0.0;
    for (double m : mi) s += std::min(1.0, std::max(0.0, rho * m));
    return s / static_cast<double>(mi.size());
  };

  // Ceiling: every positive-information column saturated at 1.
  double max_mean = 0.0;
  for (double m : mi) max_mean += m > 0.0 ? 1.0 : 0.0;
  max_mean /= static_cast<double>(mi.size());
  if (max_mean <= mu - 1e-12) {
    for (std::size_t j = 0; j < mi.size(); ++j) {
      out.probs[j] = mi[j] > 0.0 ? 1.0 : 0.0;
    }
    out.saturated_shortfall = true;
    return out;
  }

  double lo = 0.0, hi = 1.0;
  while (mean_at(hi) < mu && hi < 1e18) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_at(mid) < mu) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double rho = 0.5 * (lo + hi);
  for (std::size_t j = 0; j < mi.size(); ++j) {
    out.probs[j] = std::min(1.0, std::max(0.0, rho * mi[j]));
  }
  return out;
}

// The sampling stage: reads only (rows, rates, seed) -- never the values.
inline Mask sample_column_rate_mask(int rows, const std::vector<double>& probs,
                                    const std::string& tag, std::uint64_t seed) {
  const int cols = static_cast<int>(probs.size());
  Rng rng(mix_seed(seed, 0x1DCA2u));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(rows) * cols, 0);
  std::size_t idx = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j, ++idx) {
      bits[idx] = rng.bernoulli(probs[j]) ? 1 : 0;
    }
  }
  double target = 0.0;
  for (double p : probs) target += p;
  target /= std::max(1, cols);
  return Mask::from_bits(rows, cols, std::move(bits), tag, seed, target);
}

inline Mask gen_ldmcar(const Graph& g, double mu, std::uint64_t seed,
                       int bins = 10) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu out of range");
  std::vector<double> mi(g.d, 0.0);
  std::vector<double> col(g.n);
  bool any_info = false;
  for (int j = 0; j < g.d; ++j) {
    for (int i = 0; i < g.n; ++i) col[i] = g.features.at(i, j);
    mi[j] = mi_binned(col, g.labels, bins);
    any_info = any_info || mi[j] > 0.0;
  }
  if (!any_info && mu > 0.0) {
    // No column carries label information; fall back to uniform masking
    // so the requested rate is still honored, and say so in the tag.
    Mask m = gen_umcar(g.n, g.d, mu, seed);
    return Mask::from_bits(m.rows, m.cols, std::move(m.bits),
                           "ld-mcar!umcar-fallback", seed, mu);
  }
  RateAllocation alloc = ldmcar_allocate(mi, mu);
  std::string tag = "ld-mcar";
  if (alloc.saturated_shortfall) tag += "!sat";
  Mask m = sample_column_rate_mask(g.n, alloc.probs, tag, seed);
  m.target_rate = mu;
  return m;
}

// --- feature-dependent MNAR --------------------------------------------
// Per column: threshold at the tau-quantile, mask entries >= threshold at
// mu_hi and the rest at mu_lo with mu_hi = ratio * mu_lo, solved so the
// column-wise expected rate is mu. If mu_hi would exceed 1 it is clamped
// and mu_lo re-solved, keeping the overall rate (the ratio gives way).

struct ConditionalRates {
  double lo = 0.0;
  double hi = 0.0;
  bool clamped = false;
};

inline ConditionalRates solve_conditional_rates(double mu, double p,
                                                double ratio) {
  ConditionalRates r;
  if (mu == 0.0) return r;
  r.lo = mu / (p * ratio + (1.0 - p));
  r.hi = ratio * r.lo;
  if (r.hi > 1.0) {
    r.clamped = true;
    r.hi = 1.0;
    r.lo = p < 1.0 ? (mu - p) / (1.0 - p) : 0.0;
    r.lo = std::min(1.0, std::max(0.0, r.lo));
  }
  return r;
}

inline Mask gen_fdmnar(const Tensor2& features, double mu, double tau,
                       double ratio, std::uint64_t seed) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu out of range");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau out of range");
  if (!(ratio >= 1.0)) throw std::invalid_argument("ratio must be >= 1");
  const int n = features.rows, d = features.cols;
  std::vector<double> lo(d), hi(d), q(d);
  std::vector<bool> constant(d, false);
  std::vector<double> col(n);
  bool any_const = false;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) col[i] = features.at(i, j);
    const double cmin = *std::min_element(col.begin(), col.end());
    const double cmax = *std::max_element(col.begin(), col.end());
    if (cmin == cmax) {
      // Constant column: no above/below structure to exploit. Treat every
      // entry as "below" so the column still reaches rate mu uniformly.
      constant[j] = true;
      any_const = true;
      q[j] = cmax;
      lo[j] = mu;
      hi[j] = mu;
      continue;
    }
    q[j] = quantile(col, tau);
    int above = 0;
    for (double v : col) above += v >= q[j] ? 1 : 0;
    const double p = static_cast<double>(above) / n;
    ConditionalRates r = solve_conditional_rates(mu, p, ratio);
    lo[j] = r.lo;
    hi[j] = r.hi;
  }
  Rng rng(mix_seed(seed, 0xFDA2u));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * d, 0);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j, ++idx) {
      const double rate =
          (!constant[j] && features.at(i, j) >= q[j]) ? hi[j] : lo[j];
      bits[idx] = rng.bernoulli(rate) ? 1 : 0;
    }
  }
  std::string tag = any_const ? "fd-mnar!const" : "fd-mnar";
  return Mask::from_bits(n, d, std::move(bits), tag, seed, mu);
}

// --- class-dependent MNAR ----------------------------------------------
// Fit a one-vs-rest depth-limited tree per class; the conditions along its
// positive paths define which entries are "informative" for that class.
// Entry (i,j) is informative iff some condition of class label(i) tests
// feature j and X(i,j) satisfies it. Informative entries are masked at
// mu_hi, the rest at mu_lo, with the same hi/lo solve as above but a
// single global informative fraction p.

inline Mask gen_cdmnar(const Graph& g, double mu, int tree_depth, double ratio,
                       std::uint64_t seed, int min_leaf = 5) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu out of range");
  if (!(ratio >= 1.0)) throw std::invalid_argument("ratio must be >= 1");
  if (tree_depth < 1) throw std::invalid_argument("tree_depth must be >= 1");
  const int n = g.n, d = g.d;

  // Per class: the flattened list of positive-path conditions.
  std::vector<std::vector<TreeCondition>> rules(g.num_classes);
  std::vector<int> onevsrest(n);
  for (int c = 0; c < g.num_classes; ++c) {
    for (int i = 0; i < n; ++i) onevsrest[i] = g.labels[i] == c ? 1 : 0;
    DecisionTree tree = fit_tree(g.features, onevsrest, tree_depth, min_leaf);
    for (const auto& path : positive_paths(tree)) {
      rules[c].insert(rules[c].end(), path.begin(), path.end());
    }
  }

  std::vector<std::uint8_t> informative(static_cast<std::size_t>(n) * d, 0);
  std::size_t info_count = 0;
  for (int i = 0; i < n; ++i) {
    const auto& rs = rules[g.labels[i]];
    for (const TreeCondition& c : rs) {
      const double v = g.features.at(i, c.feature);
      const bool sat = c.cmp == Cmp::kLess ? v < c.threshold : v >= c.threshold;
      if (sat) {
        auto& cell = informative[static_cast<std::size_t>(i) * d + c.feature];
        info_count += cell == 0;
        cell = 1;
      }
    }
  }
  const double p = static_cast<double>(info_count) / (static_cast<double>(n) * d);
  ConditionalRates r = solve_conditional_rates(mu, p, ratio);
  Rng rng(mix_seed(seed, 0xCDA2u));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * d, 0);
  for (std::size_t idx = 0; idx < bits.size(); ++idx) {
    bits[idx] = rng.bernoulli(informative[idx] ? r.hi : r.lo) ? 1 : 0;
  }
  std::string tag = "cd-mnar";
  if (info_count == 0 && mu > 0.0) tag += "!noinfo";
  return Mask::from_bits(n, d, std::move(bits), tag, seed, mu);
}

// --- dispatch and regimes ----------------------------------------------

inline Mask generate_mask(const Graph& g, const MechanismSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case MechanismKind::kUMcar:
      return gen_umcar(g.n, g.d, spec.target_rate, spec.seed);
    case MechanismKind::kSMcar:
      return gen_smcar(g.n, g.d, spec.target_rate, spec.seed);
    case MechanismKind::kLdMcar:
      return gen_ldmcar(g, spec.target_rate, spec.seed);
    case MechanismKind::kFdMnar:
      return gen_fdmnar(g.features, spec.target_rate, spec.tau,
                        spec.hi_lo_ratio, spec.seed);
    case MechanismKind::kCdMnar:
      return gen_cdmnar(g, spec.target_rate, spec.tree_depth, spec.hi_lo_ratio,
                        spec.seed);
  }
  throw std::invalid_argument("unknown mechanism kind");
}

// Materialize a regime over a split: the matched regime is one mask for
// all rows; the shifted regime masks test rows with the test mechanism
// and all other rows with the train mechanism.
inline Mask realize_regime(const Graph& g, const NodeSplit& split,
                           const RegimeSpec& spec) {
  spec.validate();
  if (spec.regime == Regime::kR1) return generate_mask(g, spec.train);

  Mask train_mask = generate_mask(g, spec.train);
  Mask test_mask = generate_mask(g, spec.test);
  std::vector<std::uint8_t> bits = train_mask.bits;
  for (int i : split.test) {
    for (int j = 0; j < g.d; ++j) {
      bits[static_cast<std::size_t>(i) * g.d + j] = test_mask.missing(i, j);
    }
  }
  const std::string tag = train_mask.mechanism_tag + "->" + test_mask.mechanism_tag;
  Mask out = Mask::from_bits(g.n, g.d, std::move(bits), tag,
                             spec.train.seed, spec.train.target_rate);
  return out;
}

}  // namespace mgb
