#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "mgb/mechanisms.hpp"
#include "mgb/rng.hpp"
#include "support/builders.hpp"

using mgb::Graph;
using mgb::Mask;
using mgb::Tensor2;
using mgb_test::make_graph;

namespace {

double column_rate(const Mask& m, int j) {
  int ones = 0;
  for (int i = 0; i < m.rows; ++i) ones += m.missing(i, j);
  return static_cast<double>(ones) / m.rows;
}

Graph gaussian_graph(int n, int d, int label_feature, std::uint64_t seed) {
  mgb::Rng rng(seed);
  Tensor2 f(n, d);
  for (double& v : f.data) v = rng.normal();
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    labels.push_back(f.at(i, label_feature) > 0 ? 1 : 0);
  }
  return make_graph(n, d, 2, {}, labels, std::move(f));
}

}  // namespace

TEST_CASE("uniform mechanism hits its rate and is seed-deterministic") {
  Mask a = mgb::gen_umcar(200, 50, 0.3, 7);
  Mask b = mgb::gen_umcar(200, 50, 0.3, 7);
  Mask c = mgb::gen_umcar(200, 50, 0.3, 8);
  CHECK(a.bits == b.bits);
  CHECK(a.bits != c.bits);
  CHECK(a.mechanism_tag == "u-mcar");
  // 10000 entries: 4-sigma band around 0.3 is about +-0.018.
  CHECK(std::fabs(a.realized_rate - 0.3) < 0.02);
  CHECK(mgb::gen_umcar(10, 10, 0.0, 1).realized_rate == 0.0);
  CHECK(mgb::gen_umcar(10, 10, 1.0, 1).realized_rate == 1.0);
}

TEST_CASE("structured mechanism masks exactly round(mu*n) whole rows") {
  Mask m = mgb::gen_smcar(10, 4, 0.5, 3);
  int full_rows = 0;
  for (int i = 0; i < 10; ++i) {
    int ones = 0;
    for (int j = 0; j < 4; ++j) ones += m.missing(i, j);
    CHECK((ones == 0 || ones == 4));  // whole-row masking only
    full_rows += ones == 4;
  }
  CHECK(full_rows == 5);
  CHECK(m.mechanism_tag == "s-mcar");
  CHECK(mgb::gen_smcar(10, 4, 0.33, 3).realized_rate ==
        Catch::Approx(0.3));  // round(3.3) = 3 rows of 10
  Mask again = mgb::gen_smcar(10, 4, 0.5, 3);
  CHECK(m.bits == again.bits);
}

TEST_CASE("rate allocation scales per-column rates by informativeness") {
  // mean(rho * mi) = mu with no clamping: rho = 1.
  auto a = mgb::ldmcar_allocate({0.2, 0.4}, 0.3);
  CHECK(a.probs[0] == Catch::Approx(0.2).margin(1e-9));
  CHECK(a.probs[1] == Catch::Approx(0.4).margin(1e-9));
  CHECK_FALSE(a.saturated_shortfall);
  // rho = 2.5.
  auto b = mgb::ldmcar_allocate({0.1, 0.3}, 0.5);
  CHECK(b.probs[0] == Catch::Approx(0.25).margin(1e-9));
  CHECK(b.probs[1] == Catch::Approx(0.75).margin(1e-9));
  // One column saturates at 1; the other absorbs the remaining mass.
  auto c = mgb::ldmcar_allocate({0.1, 0.4}, 0.6);
  CHECK(c.probs[0] == Catch::Approx(0.24).margin(1e-9));
  CHECK(c.probs[1] == Catch::Approx(0.96).margin(1e-9));
  CHECK_FALSE(c.saturated_shortfall);
  // Unattainable: a zero-information column can never be masked, so the
  // mean cannot reach 0.8. Everything that can saturate saturates.
  auto d = mgb::ldmcar_allocate({0.0, 0.5}, 0.8);
  CHECK(d.probs[0] == 0.0);
  CHECK(d.probs[1] == 1.0);
  CHECK(d.saturated_shortfall);
}

TEST_CASE("label-dependent mechanism follows the allocated column rates") {
  // Column 0 determines the label exactly; column 1 is noise. Column 0
  // must receive (much) more masking.
  Graph g = gaussian_graph(4000, 2, /*label_feature=*/0, 11);
  Mask m = mgb::gen_ldmcar(g, 0.2, 5);
  CHECK(m.mechanism_tag == "ld-mcar");
  CHECK(std::fabs(m.realized_rate - 0.2) < 0.02);
  CHECK(column_rate(m, 0) > column_rate(m, 1) + 0.1);
  Mask again = mgb::gen_ldmcar(g, 0.2, 5);
  CHECK(m.bits == again.bits);
}

TEST_CASE("label-dependent sampling is blind to values given the rates") {
  // With the solved per-column rates held fixed, the Bernoulli sampling
  // stage reads only (shape, rates, seed): same seed, same bits.
  std::vector<double> probs = {0.1, 0.7, 0.4};
  Mask a = mgb::sample_column_rate_mask(50, probs, "x", 9);
  Mask b = mgb::sample_column_rate_mask(50, probs, "x", 9);
  CHECK(a.bits == b.bits);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::fabs(column_rate(a, j) - probs[j]) < 0.25);
  }
}

TEST_CASE("label-dependent mechanism on uninformative data falls back") {
  // Constant features carry no label information in any column.
  Tensor2 f(50, 3, 1.5);
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) labels.push_back(i % 2);
  Graph g = make_graph(50, 3, 2, {}, labels, std::move(f));
  Mask m = mgb::gen_ldmcar(g, 0.4, 2);
  CHECK(m.mechanism_tag.find("fallback") != std::string::npos);
  CHECK(std::fabs(m.realized_rate - 0.4) < 0.06);
  // At rate zero nothing is masked and no fallback is needed.
  Mask z = mgb::gen_ldmcar(g, 0.0, 2);
  CHECK(z.realized_rate == 0.0);
  CHECK(z.mechanism_tag == "ld-mcar");
}

TEST_CASE("feature-dependent mechanism's conditional rates honor the ratio") {
  // One continuous column, 20000 rows: above-quantile entries are masked
  // hi/lo = 4 times more often; the overall rate stays at mu = 0.25.
  const int n = 20000;
  Tensor2 f(n, 1);
  mgb::Rng rng(13);
  for (double& v : f.data) v = rng.normal();
  Mask m = mgb::gen_fdmnar(f, 0.25, 0.75, 4.0, 21);
  CHECK(m.mechanism_tag == "fd-mnar");
  CHECK(std::fabs(m.realized_rate - 0.25) < 0.02);

  const double q = mgb::quantile(f.data, 0.75);
  int hi_n = 0, hi_miss = 0, lo_n = 0, lo_miss = 0;
  for (int i = 0; i < n; ++i) {
    if (f.at(i, 0) >= q) {
      ++hi_n;
      hi_miss += m.missing(i, 0);
    } else {
      ++lo_n;
      lo_miss += m.missing(i, 0);
    }
  }
  const double ratio = (static_cast<double>(hi_miss) / hi_n) /
                       (static_cast<double>(lo_miss) / lo_n);
  CHECK(ratio == Catch::Approx(4.0).epsilon(0.10));
  // The derived conditional rates for p = 0.25: lo = 1/7, hi = 4/7.
  CHECK(static_cast<double>(lo_miss) / lo_n == Catch::Approx(1.0 / 7).epsilon(0.08));
  CHECK(static_cast<double>(hi_miss) / hi_n == Catch::Approx(4.0 / 7).epsilon(0.08));
}

TEST_CASE("feature-dependent mechanism clamps the hi rate at one") {
  // mu = 0.5, tau = 0.75, ratio = 4 forces hi to 1.0 and re-solves
  // lo = (0.5 - p) / (1 - p) to keep the overall rate.
  const int n = 8000;
  Tensor2 f(n, 1);
  mgb::Rng rng(14);
  for (double& v : f.data) v = rng.normal();
  Mask m = mgb::gen_fdmnar(f, 0.5, 0.75, 4.0, 22);
  const double q = mgb::quantile(f.data, 0.75);
  for (int i = 0; i < n; ++i) {
    if (f.at(i, 0) >= q) CHECK(m.missing(i, 0));
  }
  CHECK(std::fabs(m.realized_rate - 0.5) < 0.02);
}

TEST_CASE("feature-dependent mechanism flags constant columns") {
  Tensor2 f(2000, 2);
  mgb::Rng rng(15);
  for (int i = 0; i < 2000; ++i) {
    f.at(i, 0) = 7.0;  // constant: every entry treated as "below"
    f.at(i, 1) = rng.normal();
  }
  Mask m = mgb::gen_fdmnar(f, 0.3, 0.75, 4.0, 23);
  CHECK(m.mechanism_tag.find("const") != std::string::npos);
  // The constant column still gets rate mu overall.
  CHECK(column_rate(m, 0) == Catch::Approx(0.3).margin(0.035));
  CHECK(std::fabs(m.realized_rate - 0.3) < 0.03);
}

TEST_CASE("class-dependent mechanism masks rule-matching entries more") {
  // Labels follow feature 0; feature 1 is noise, so the trees only state
  // conditions about feature 0 and column 1 stays at the lo rate.
  Graph g = gaussian_graph(6000, 2, 0, 17);
  Mask m = mgb::gen_cdmnar(g, 0.25, 3, 4.0, 29);
  CHECK(m.mechanism_tag == "cd-mnar");
  CHECK(std::fabs(m.realized_rate - 0.25) < 0.02);

  // Column 0 (almost everywhere informative for the matching class) should
  // sit near the hi rate; column 1 near the lo rate; ratio near 4.
  const double r0 = column_rate(m, 0);
  const double r1 = column_rate(m, 1);
  CHECK(r0 / r1 == Catch::Approx(4.0).epsilon(0.25));
  Mask again = mgb::gen_cdmnar(g, 0.25, 3, 4.0, 29);
  CHECK(m.bits == again.bits);
}

TEST_CASE("class-dependent mechanism without usable rules degrades to uniform") {
  Tensor2 f(60, 2, 4.25);  // constant features: no splits anywhere
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i % 2);
  Graph g = make_graph(60, 2, 2, {}, labels, std::move(f));
  Mask m = mgb::gen_cdmnar(g, 0.3, 3, 4.0, 31);
  CHECK(m.mechanism_tag.find("noinfo") != std::string::npos);
  CHECK(std::fabs(m.realized_rate - 0.3) < 0.12);
}

TEST_CASE("mechanism spec validation") {
  mgb::MechanismSpec s;
  s.kind = mgb::MechanismKind::kUMcar;
  s.target_rate = 0.5;
  s.validate();
  s.target_rate = 1.5;
  CHECK_THROWS(s.validate());
  s.target_rate = 0.5;
  s.tau = 1.0;
  CHECK_THROWS(s.validate());
  s.tau = 0.75;
  s.hi_lo_ratio = 0.5;
  CHECK_THROWS(s.validate());
  s.hi_lo_ratio = 4.0;
  s.tree_depth = 0;
  CHECK_THROWS(s.validate());
}

TEST_CASE("matched-condition regime is a single mechanism mask") {
  Graph g = gaussian_graph(300, 3, 0, 41);
  auto split = mgb::make_split(g, {0.6, 0.2, 0.2}, mgb::SplitMode::kTransductive, 1);
  mgb::MechanismSpec u;
  u.kind = mgb::MechanismKind::kUMcar;
  u.target_rate = 0.3;
  u.seed = 77;
  mgb::RegimeSpec r1{mgb::Regime::kR1, u, u};
  Mask m = mgb::realize_regime(g, split, r1);
  Mask direct = mgb::gen_umcar(300, 3, 0.3, 77);
  CHECK(m.bits == direct.bits);
}

TEST_CASE("matched-condition regime rejects differing mechanisms") {
  Graph g = gaussian_graph(100, 2, 0, 42);
  auto split = mgb::make_split(g, {0.6, 0.2, 0.2}, mgb::SplitMode::kTransductive, 1);
  mgb::MechanismSpec a, b;
  a.kind = mgb::MechanismKind::kUMcar;
  a.target_rate = 0.3;
  b.kind = mgb::MechanismKind::kUMcar;
  b.target_rate = 0.5;
  mgb::RegimeSpec bad{mgb::Regime::kR1, a, b};
  CHECK_THROWS(mgb::realize_regime(g, split, bad));
}

TEST_CASE("shifted regime masks test rows with the test mechanism") {
  Graph g = gaussian_graph(200, 4, 0, 43);
  auto split = mgb::make_split(g, {0.6, 0.2, 0.2}, mgb::SplitMode::kTransductive, 2);
  mgb::MechanismSpec train, test;
  train.kind = mgb::MechanismKind::kSMcar;
  train.target_rate = 0.6;
  train.seed = 5;
  test.kind = mgb::MechanismKind::kUMcar;
  test.target_rate = 0.0;
  test.seed = 6;
  mgb::RegimeSpec r2{mgb::Regime::kR2, train, test};
  Mask m = mgb::realize_regime(g, split, r2);
  // Test rows: uniform at rate 0 -> fully observed.
  for (int i : split.test) {
    for (int j = 0; j < 4; ++j) CHECK_FALSE(m.missing(i, j));
  }
  // Train/val rows: whole-row masking pattern from the structured mask.
  Mask structured = mgb::gen_smcar(200, 4, 0.6, 5);
  for (int i : split.train) {
    for (int j = 0; j < 4; ++j) {
      CHECK(m.missing(i, j) == structured.missing(i, j));
    }
  }
  CHECK(m.mechanism_tag.find("->") != std::string::npos);
}
