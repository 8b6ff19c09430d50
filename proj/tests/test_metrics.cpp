#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "mgb/metrics.hpp"
#include "mgb/rng.hpp"

TEST_CASE("macro f1 on a worked example") {
  // truths [0,0,1,1], preds [0,1,1,1]:
  //   class 0: P=1, R=1/2, F1=2/3; class 1: P=2/3, R=1, F1=4/5.
  const double f1 = mgb::macro_f1({0, 1, 1, 1}, {0, 0, 1, 1}, 2);
  CHECK(f1 == Catch::Approx(0.7333333333333334).epsilon(1e-12));
}

TEST_CASE("macro f1 counts empty classes as zero") {
  // Class 1 never appears in truth or prediction: F1_1 = 0 by convention.
  CHECK(mgb::macro_f1({0, 0}, {0, 0}, 2) == 0.5);
}

TEST_CASE("macro f1 of a perfect prediction is one") {
  CHECK(mgb::macro_f1({0, 1, 2, 1}, {0, 1, 2, 1}, 3) == 1.0);
}

TEST_CASE("macro f1 validates inputs") {
  CHECK_THROWS(mgb::macro_f1({0}, {0, 1}, 2));   // length mismatch
  CHECK_THROWS(mgb::macro_f1({}, {}, 2));        // empty
  CHECK_THROWS(mgb::macro_f1({0, 2}, {0, 1}, 2));  // prediction out of range
  CHECK_THROWS(mgb::macro_f1({0, 1}, {0, 1}, 1));  // degenerate class count
}

TEST_CASE("macro f1 matches a brute-force confusion computation") {
  mgb::Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const int c = 2 + static_cast<int>(rng.integer(3));
    std::vector<int> preds, truths;
    for (int i = 0; i < 50; ++i) {
      preds.push_back(static_cast<int>(rng.integer(c)));
      truths.push_back(static_cast<int>(rng.integer(c)));
    }
    double total = 0.0;
    for (int k = 0; k < c; ++k) {
      int tp = 0, fp = 0, fn = 0;
      for (int i = 0; i < 50; ++i) {
        if (preds[i] == k && truths[i] == k) ++tp;
        if (preds[i] == k && truths[i] != k) ++fp;
        if (preds[i] != k && truths[i] == k) ++fn;
      }
      const double precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0;
      const double recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0;
      total += precision + recall > 0 ? 2 * precision * recall / (precision + recall)
                                      : 0;
    }
    CHECK(mgb::macro_f1(preds, truths, c) ==
          Catch::Approx(total / c).epsilon(1e-12));
  }
}

TEST_CASE("aggregate reports mean and sample standard deviation") {
  auto agg = mgb::aggregate({0.8, 0.9});
  CHECK(agg.mean == Catch::Approx(0.85).epsilon(1e-12));
  CHECK(agg.stddev == Catch::Approx(0.07071067811865475).epsilon(1e-9));
}

TEST_CASE("aggregate of a single value has zero spread") {
  auto agg = mgb::aggregate({0.42});
  CHECK(agg.mean == 0.42);
  CHECK(agg.stddev == 0.0);
}

TEST_CASE("aggregate rejects empty input") {
  CHECK_THROWS(mgb::aggregate({}));
}
