// Exhaustive-enumeration checks of the two information facts the benchmark
// rests on, verified on tiny discrete worlds where every probability can be
// summed exactly:
//
//  * check_ignorability — when the per-entry missingness pattern depends
//    only on always-available values (and never on the label), the
//    conditional label distribution computed through the full joint equals
//    the one computed with the missingness model dropped entirely.
//  * check_masking_bound — masking entries uniformly at random can only
//    destroy label information, and for binary features the loss is at most
//    (#cells) * rate * h2(expected zero fraction).
//
// The joint is stored in factored form P(X) * P(Y|X) * P(M|X,Y) over
// X in {0,1}^(n*d), Y in {0..C-1}^n, M in {0,1}^(n*d), capped at 6 cells so
// enumeration stays exact and fast.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mgb/rng.hpp"
#include "mgb/stats.hpp"

namespace mgb {

struct JointTable {
  int n = 0, d = 0, num_classes = 0;
  std::vector<double> px;          // [x], size 2^(n*d)
  std::vector<double> py_given_x;  // [x * ny + y]
  std::vector<double> pm_given_xy; // [(x * ny + y) * nm + m]

  int cells() const { return n * d; }
  int nx() const { return 1 << cells(); }
  int nm() const { return 1 << cells(); }
  int ny() const {
    int v = 1;
    for (int i = 0; i < n; ++i) v *= num_classes;
    return v;
  }

  double joint(int x, int y, int m) const {
    const std::size_t xy = static_cast<std::size_t>(x) * ny() + y;
    return px[x] * py_given_x[xy] * pm_given_xy[xy * nm() + m];
  }

  void validate() const {
    if (n < 1 || d < 1 || num_classes < 2) {
      throw std::invalid_argument("joint table: bad dimensions");
    }
    if (cells() > 6) {
      throw std::invalid_argument("joint table: more than 6 cells");
    }
    if (px.size() != static_cast<std::size_t>(nx()) ||
        py_given_x.size() != static_cast<std::size_t>(nx()) * ny() ||
        pm_given_xy.size() != static_cast<std::size_t>(nx()) * ny() * nm()) {
      throw std::invalid_argument("joint table: factor size mismatch");
    }
    auto check_simplex = [](const double* p, int len, const char* what) {
      double s = 0.0;
      for (int i = 0; i < len; ++i) {
        if (p[i] < 0.0) throw std::invalid_argument(what);
        s += p[i];
      }
      if (std::fabs(s - 1.0) > 1e-12) throw std::invalid_argument(what);
    };
    check_simplex(px.data(), nx(), "joint table: P(X) not a distribution");
    for (int x = 0; x < nx(); ++x) {
      check_simplex(&py_given_x[static_cast<std::size_t>(x) * ny()], ny(),
                    "joint table: P(Y|X) row not a distribution");
      for (int y = 0; y < ny(); ++y) {
        check_simplex(
            &pm_given_xy[(static_cast<std::size_t>(x) * ny() + y) * nm()],
            nm(), "joint table: P(M|X,Y) row not a distribution");
      }
    }
  }

  // Uniform P(X), uniform P(Y|X), no missingness.
  static JointTable uniform(int n, int d, int num_classes) {
    JointTable t;
    t.n = n;
    t.d = d;
    t.num_classes = num_classes;
    if (t.cells() > 6) {
      throw std::invalid_argument("joint table: more than 6 cells");
    }
    t.px.assign(t.nx(), 1.0 / t.nx());
    t.py_given_x.assign(static_cast<std::size_t>(t.nx()) * t.ny(),
                        1.0 / t.ny());
    t.pm_given_xy.assign(
        static_cast<std::size_t>(t.nx()) * t.ny() * t.nm(), 0.0);
    for (int x = 0; x < t.nx(); ++x) {
      for (int y = 0; y < t.ny(); ++y) {
        t.pm_given_xy[(static_cast<std::size_t>(x) * t.ny() + y) * t.nm()] = 1.0;
      }
    }
    return t;
  }

  // Strictly positive random P(X) and P(Y|X); no missingness model yet.
  static JointTable random_joint(int n, int d, int num_classes, Rng& rng) {
    JointTable t = uniform(n, d, num_classes);
    auto randomize = [&rng](double* p, int len) {
      double s = 0.0;
      for (int i = 0; i < len; ++i) {
        p[i] = 0.05 + rng.uniform();
        s += p[i];
      }
      for (int i = 0; i < len; ++i) p[i] /= s;
    };
    randomize(t.px.data(), t.nx());
    for (int x = 0; x < t.nx(); ++x) {
      randomize(&t.py_given_x[static_cast<std::size_t>(x) * t.ny()], t.ny());
    }
    return t;
  }

  // Every cell missing independently with the same rate, regardless of X, Y.
  void set_constant_rate_missingness(double mu) {
    for (int x = 0; x < nx(); ++x) {
      for (int y = 0; y < ny(); ++y) {
        double* row = &pm_given_xy[(static_cast<std::size_t>(x) * ny() + y) * nm()];
        for (int m = 0; m < nm(); ++m) {
          const int miss = std::popcount(static_cast<unsigned>(m));
          row[m] = std::pow(mu, miss) * std::pow(1.0 - mu, cells() - miss);
        }
      }
    }
  }

  // Cell-independent missingness whose per-cell rates are functions of the
  // values on a randomly chosen always-observed subset of cells. Such a
  // model never looks at a value it hides and never looks at the label, so
  // it is exactly ignorable.
  static JointTable random_ignorable(int n, int d, int num_classes, Rng& rng) {
    JointTable t = random_joint(n, d, num_classes, rng);
    const int nc = t.cells();
    unsigned always_observed = 0;
    for (int k = 0; k < nc; ++k) {
      if (rng.bernoulli(0.5)) always_observed |= 1u << k;
    }
    // Per-cell rate table indexed by the assignment of the observed subset.
    const int nobs = std::popcount(always_observed);
    std::vector<std::vector<double>> rate(nc,
                                          std::vector<double>(1 << nobs));
    for (int k = 0; k < nc; ++k) {
      for (double& r : rate[k]) r = rng.uniform(0.05, 0.95);
    }
    auto observed_key = [&](int x) {
      int key = 0, pos = 0;
      for (int k = 0; k < nc; ++k) {
        if (always_observed & (1u << k)) {
          key |= ((x >> k) & 1) << pos;
          ++pos;
        }
      }
      return key;
    };
    for (int x = 0; x < t.nx(); ++x) {
      const int key = observed_key(x);
      for (int y = 0; y < t.ny(); ++y) {
        double* row =
            &t.pm_given_xy[(static_cast<std::size_t>(x) * t.ny() + y) * t.nm()];
        for (int m = 0; m < t.nm(); ++m) {
          if (static_cast<unsigned>(m) & always_observed) {
            row[m] = 0.0;  // protected cells never go missing
            continue;
          }
          double p = 1.0;
          for (int k = 0; k < nc; ++k) {
            if (always_observed & (1u << k)) continue;
            const double rk = rate[k][key];
            p *= (m >> k) & 1 ? rk : 1.0 - rk;
          }
          row[m] = p;
        }
      }
    }
    return t;
  }

  // One binary cell with Y == X; the cell goes missing far more often when
  // Y = 1. Label-dependent, hence deliberately not ignorable.
  static JointTable label_dependent_counterexample() {
    JointTable t = uniform(1, 1, 2);
    t.py_given_x = {1.0, 0.0, 0.0, 1.0};  // P(Y=y|X=x) = [y == x]
    // Layout: [(x*2+y)*2 + m].
    t.pm_given_xy = {
        0.9, 0.1,  // x=0,y=0
        0.1, 0.9,  // x=0,y=1 (zero-probability branch, kept normalized)
        0.9, 0.1,  // x=1,y=0 (zero-probability branch)
        0.1, 0.9,  // x=1,y=1
    };
    return t;
  }
};

namespace detail {

// Mutual information (nats) of a joint table p[a*nb + b].
inline double mutual_information(const std::vector<double>& p, int na, int nb) {
  std::vector<double> pa(na, 0.0), pb(nb, 0.0);
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < nb; ++b) {
      pa[a] += p[static_cast<std::size_t>(a) * nb + b];
      pb[b] += p[static_cast<std::size_t>(a) * nb + b];
    }
  }
  double mi = 0.0;
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < nb; ++b) {
      const double v = p[static_cast<std::size_t>(a) * nb + b];
      if (v > 0.0) mi += v * std::log(v / (pa[a] * pb[b]));
    }
  }
  return mi;
}

}  // namespace detail

struct MaskingBoundResult {
  double delta = 0.0;        // I(Y; degraded X) - I(Y; X)
  double lower_bound = 0.0;  // -(n*d) * mu * h2(E[zero fraction])
  double mi_full = 0.0;
  double mi_masked = 0.0;

  bool within(double tol) const {
    return delta <= tol && delta >= lower_bound - tol;
  }
};

// Exhaustively computes the information change caused by hiding each cell
// independently with probability mu (the hidden symbol is a third value
// distinct from 0 and 1). Uses only P(X,Y) from the table.
inline MaskingBoundResult check_masking_bound(const JointTable& t, double mu) {
  if (mu < 0.0 || mu > 1.0) {
    throw std::invalid_argument("check_masking_bound: rate outside [0,1]");
  }
  t.validate();
  const int nc = t.cells();
  const int nx = t.nx(), ny = t.ny();

  // P(X, Y).
  std::vector<double> pxy(static_cast<std::size_t>(nx) * ny);
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      pxy[static_cast<std::size_t>(x) * ny + y] =
          t.px[x] * t.py_given_x[static_cast<std::size_t>(x) * ny + y];
    }
  }

  // P(degraded X, Y): each degraded matrix is a base-3 word, digit 2 = hidden.
  int ntilde = 1;
  for (int k = 0; k < nc; ++k) ntilde *= 3;
  std::vector<double> ptilde(static_cast<std::size_t>(ntilde) * ny, 0.0);
  for (int m = 0; m < t.nm(); ++m) {
    const int miss = std::popcount(static_cast<unsigned>(m));
    const double w = std::pow(mu, miss) * std::pow(1.0 - mu, nc - miss);
    if (w == 0.0) continue;
    for (int x = 0; x < nx; ++x) {
      int code = 0, base = 1;
      for (int k = 0; k < nc; ++k) {
        const int digit = (m >> k) & 1 ? 2 : (x >> k) & 1;
        code += digit * base;
        base *= 3;
      }
      for (int y = 0; y < ny; ++y) {
        ptilde[static_cast<std::size_t>(code) * ny + y] +=
            w * pxy[static_cast<std::size_t>(x) * ny + y];
      }
    }
  }

  MaskingBoundResult r;
  r.mi_full = detail::mutual_information(pxy, nx, ny);
  r.mi_masked = detail::mutual_information(ptilde, ntilde, ny);
  r.delta = r.mi_masked - r.mi_full;

  double expected_zero_fraction = 0.0;
  for (int x = 0; x < nx; ++x) {
    const int zeros = nc - std::popcount(static_cast<unsigned>(x));
    expected_zero_fraction += t.px[x] * zeros / static_cast<double>(nc);
  }
  r.lower_bound = -nc * mu * binary_entropy(expected_zero_fraction);
  return r;
}

struct IgnorabilityResult {
  double max_discrepancy = 0.0;
  int patterns_checked = 0;
};

// For every observable situation (missingness pattern m with observed values
// o) compares the label posterior computed from the full joint (which knows
// the missingness model) against the posterior computed with the model
// dropped: sum over completions of P(Y|X) P(X_hidden | X_observed).
inline IgnorabilityResult check_ignorability(const JointTable& t) {
  t.validate();
  const int nc = t.cells();
  const int ny = t.ny();

  IgnorabilityResult res;
  for (int m = 0; m < t.nm(); ++m) {
    std::vector<int> hidden, shown;
    for (int k = 0; k < nc; ++k) {
      ((m >> k) & 1 ? hidden : shown).push_back(k);
    }
    for (int o = 0; o < (1 << shown.size()); ++o) {
      int base = 0;
      for (std::size_t i = 0; i < shown.size(); ++i) {
        base |= ((o >> i) & 1) << shown[i];
      }
      std::vector<double> route_a(ny, 0.0), route_b(ny, 0.0);
      double mass_a = 0.0, mass_x = 0.0;
      for (int e = 0; e < (1 << hidden.size()); ++e) {
        int x = base;
        for (std::size_t i = 0; i < hidden.size(); ++i) {
          x |= ((e >> i) & 1) << hidden[i];
        }
        mass_x += t.px[x];
        for (int y = 0; y < ny; ++y) {
          const double j = t.joint(x, y, m);
          route_a[y] += j;
          mass_a += j;
          route_b[y] +=
              t.px[x] * t.py_given_x[static_cast<std::size_t>(x) * ny + y];
        }
      }
      if (mass_a <= 1e-15 || mass_x <= 0.0) continue;  // unreachable pattern
      res.patterns_checked += 1;
      for (int y = 0; y < ny; ++y) {
        const double diff =
            std::fabs(route_a[y] / mass_a - route_b[y] / mass_x);
        res.max_discrepancy = std::max(res.max_discrepancy, diff);
      }
    }
  }
  return res;
}

}  // namespace mgb
