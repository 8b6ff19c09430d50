#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "mgb/mask.hpp"

using mgb::Mask;
using mgb::Tensor2;

namespace {

Tensor2 make(int r, int c, std::initializer_list<double> vals) {
  Tensor2 t(r, c);
  std::size_t k = 0;
  for (double v : vals) t.data[k++] = v;
  return t;
}

Mask mask_of(int r, int c, std::initializer_list<int> bits) {
  std::vector<std::uint8_t> b;
  for (int v : bits) b.push_back(static_cast<std::uint8_t>(v));
  return Mask::from_bits(r, c, b, "test", 0);
}

}  // namespace

TEST_CASE("zero padding blanks exactly the masked entries") {
  Tensor2 f = make(2, 2, {1, 2, 3, 4});
  Mask m = mask_of(2, 2, {0, 1, 0, 0});
  Tensor2 out = mgb::apply_zero_pad(f, m);
  CHECK(out.at(0, 0) == 1.0);
  CHECK(out.at(0, 1) == 0.0);
  CHECK(out.at(1, 0) == 3.0);
  CHECK(out.at(1, 1) == 4.0);
}

TEST_CASE("imputation is idempotent and leaves observed entries unchanged") {
  Tensor2 f = make(3, 2, {1, -7, 3, -7, 5, -7});
  Mask m = mask_of(3, 2, {0, 1, 0, 1, 0, 1});
  Tensor2 once = mgb::apply_zero_pad(f, m);
  Tensor2 twice = mgb::apply_zero_pad(once, m);
  CHECK(once.data == twice.data);
  for (int i = 0; i < 3; ++i) CHECK(once.at(i, 0) == f.at(i, 0));
}

TEST_CASE("column mean fill uses observed entries only") {
  Tensor2 f = make(3, 2, {1, 10, 3, 20, 5, 30});
  Mask m = mask_of(3, 2, {0, 0, 1, 0, 0, 0});  // (1,0) missing
  Tensor2 out =
      mgb::apply_column_statistic(f, m, mgb::ColumnStatistic::kMean);
  CHECK(out.at(1, 0) == Catch::Approx(3.0));  // mean of {1, 5}
  CHECK(out.at(0, 0) == 1.0);
  CHECK(out.at(2, 1) == 30.0);
}

TEST_CASE("column median fill uses the lower-interpolation convention") {
  // Observed column values {7, 1, 3, 5}: median index ceil(0.5*4)-1 = 1 -> 3.
  Tensor2 f = make(5, 1, {7, 1, 3, 5, 999});
  Mask m = mask_of(5, 1, {0, 0, 0, 0, 1});
  Tensor2 out =
      mgb::apply_column_statistic(f, m, mgb::ColumnStatistic::kMedian);
  CHECK(out.at(4, 0) == 3.0);
}

TEST_CASE("fully masked column fills zero") {
  Tensor2 f = make(2, 2, {1, 2, 3, 4});
  Mask m = mask_of(2, 2, {1, 0, 1, 0});
  Tensor2 mean_out =
      mgb::apply_column_statistic(f, m, mgb::ColumnStatistic::kMean);
  Tensor2 med_out =
      mgb::apply_column_statistic(f, m, mgb::ColumnStatistic::kMedian);
  CHECK(mean_out.at(0, 0) == 0.0);
  CHECK(mean_out.at(1, 0) == 0.0);
  CHECK(med_out.at(0, 0) == 0.0);
}

TEST_CASE("mim augmentation appends the mask as indicator columns") {
  Tensor2 f = make(1, 2, {1, 2});
  Mask m = mask_of(1, 2, {0, 1});
  Tensor2 out = mgb::mim_augment(f, m);
  REQUIRE(out.rows == 1);
  REQUIRE(out.cols == 4);
  CHECK(out.at(0, 0) == 1.0);  // observed value
  CHECK(out.at(0, 1) == 0.0);  // zero-padded
  CHECK(out.at(0, 2) == 0.0);  // indicator for observed
  CHECK(out.at(0, 3) == 1.0);  // indicator for missing
}

TEST_CASE("mask and feature shapes must agree") {
  Tensor2 f = make(2, 2, {1, 2, 3, 4});
  Mask m = mask_of(1, 2, {0, 1});
  CHECK_THROWS(mgb::apply_zero_pad(f, m));
  CHECK_THROWS(mgb::apply_column_statistic(f, m, mgb::ColumnStatistic::kMean));
  CHECK_THROWS(mgb::mim_augment(f, m));
}

TEST_CASE("mask construction validates bits and computes the realized rate") {
  Mask m = mask_of(2, 2, {0, 1, 1, 1});
  CHECK(m.realized_rate == 0.75);
  std::vector<std::uint8_t> bad = {0, 2, 0, 0};
  CHECK_THROWS(Mask::from_bits(2, 2, bad, "t", 0));
  CHECK_THROWS(Mask::from_bits(3, 2, {0, 1}, "t", 0));
}

TEST_CASE("mask round-trips through CSV plus sidecar") {
  Mask m = Mask::from_bits(2, 3, {0, 1, 0, 1, 1, 0}, "u-mcar", 42);
  auto dir = std::filesystem::temp_directory_path() / "mgb_mask_rt";
  std::filesystem::create_directories(dir);
  const std::string base = (dir / "mask").string();
  mgb::save_mask(m, base);
  Mask back = mgb::load_mask(base);
  CHECK(back.rows == m.rows);
  CHECK(back.cols == m.cols);
  CHECK(back.bits == m.bits);
  CHECK(back.realized_rate == m.realized_rate);
  CHECK(back.mechanism_tag == "u-mcar");
  CHECK(back.seed == 42);
  std::filesystem::remove_all(dir);
}
