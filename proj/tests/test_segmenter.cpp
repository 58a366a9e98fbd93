#include <cmath>
#include <random>

#include "barseg/error.hpp"
#include "barseg/segmenter.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace barseg;

namespace {

double kernel_closed_form(int i, int j) {
  const int d = std::abs(i - j);
  return d == 0 ? 0.0 : (d <= 4 ? 2.0 : 1.0);
}

double penalty_closed_form(int n) {
  if (n == 8) return 0.0;
  if (n == 4) return 0.25;
  if (n % 2 == 0) return 0.5;
  return 1.0;
}

Eigen::MatrixXd block_diagonal(const std::vector<int>& sizes) {
  int b = 0;
  for (int s : sizes) b += s;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(b, b);
  int at = 0;
  for (int s : sizes) {
    A.block(at, at, s, s).setOnes();
    at += s;
  }
  return A;
}

}  // namespace

TEST_CASE("cosine autosimilarity") {
  Eigen::MatrixXd Z(3, 4);
  Z.col(0) << 1, 2, 3;
  Z.col(1) << 1, 2, 3;
  Z.col(2) << -2, 1, 0;
  Z.col(3) << 0, 0, 0;
  const auto A = cosine_autosimilarity(Z);
  CHECK(A(0, 1) == doctest::Approx(1.0));
  CHECK(A(0, 2) == doctest::Approx(0.0));
  CHECK(A(0, 0) == 1.0);
  CHECK(A(3, 3) == 0.0);
  CHECK(A.row(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(A.col(3).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd Y(2, 3);
  Y << 1, 0, 1 / std::sqrt(2.0), 0, 1, 1 / std::sqrt(2.0);
  const auto B = cosine_autosimilarity(Y);
  CHECK(B(0, 2) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(B(1, 2) == doctest::Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("autosimilarity is symmetric and bounded") {
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Random(7, 40) * 1e3;
  const auto A = cosine_autosimilarity(Z);
  CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(A.maxCoeff() <= 1.0);
  CHECK(A.minCoeff() >= -1.0);
  CHECK((A.diagonal().array() == 1.0).all());
}

TEST_CASE("kernel examples") {
  CHECK(kernel(1) == Eigen::MatrixXd::Zero(1, 1));
  const auto k4 = kernel(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(k4(i, j) == (i == j ? 0.0 : 2.0));
  const auto k10 = kernel(10);
  CHECK(k10(0, 4) == 2.0);
  CHECK(k10(0, 5) == 1.0);
  CHECK(k10(9, 0) == 1.0);
  CHECK(k10(6, 6) == 0.0);
  CHECK_THROWS_AS(kernel(0), InvalidArgument);
}

TEST_CASE("kernel and penalty match their closed forms up to 64") {
  for (int n = 1; n <= 64; ++n) {
    const auto K = kernel(n);
    REQUIRE(K.rows() == n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(K(i, j) == kernel_closed_form(i, j));
    CHECK(penalty(n) == penalty_closed_form(n));
  }
  CHECK(penalty(8) == 0.0);
  CHECK(penalty(4) == 0.25);
  CHECK(penalty(2) == 0.5);
  CHECK(penalty(10) == 0.5);
  CHECK(penalty(7) == 1.0);
  CHECK(penalty(1) == 1.0);
}

TEST_CASE("segment cost") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(10, 10);
  CHECK(segment_cost(ones, 2, 6) == 6.0);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(10, 10);
  for (int n = 1; n <= 10; ++n) CHECK(segment_cost(eye, 0, n) == 0.0);
  CHECK(segment_cost(Eigen::MatrixXd::Random(5, 5), 3, 4) == 0.0);
  CHECK_THROWS_AS(segment_cost(ones, 4, 4), InvalidArgument);
  CHECK_THROWS_AS(segment_cost(ones, -1, 4), InvalidArgument);
  CHECK_THROWS_AS(segment_cost(ones, 5, 11), InvalidArgument);
}

TEST_CASE("segment score") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(12, 12);
  const double c8 = segment_cost(ones, 0, 8);
  CHECK(segment_score(ones, 2, 10, c8) == 1.0);
  CHECK(segment_score(ones, 0, 4, segment_cost(ones, 0, 4) / 0.8) == doctest::Approx(0.55));
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(12, 12);
  CHECK(segment_score(eye, 0, 7, 1.0) == -1.0);
  CHECK_THROWS_AS(segment_score(ones, 0, 4, 0.0), DegenerateError);
}

TEST_CASE("c_k8_max") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(20, 20);
  CHECK(compute_ck8max(ones) == segment_cost(ones, 0, 8));
  CHECK(compute_ck8max(Eigen::MatrixXd::Identity(12, 12)) == 0.0);
  CHECK(compute_ck8max(Eigen::MatrixXd::Ones(5, 5)) == segment_cost(Eigen::MatrixXd::Ones(5, 5), 0, 5));

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(24, 24);
  A.block(9, 9, 8, 8).setOnes();
  double best = -1.0;
  int arg = -1;
  for (int t = 0; t + 8 <= 24; ++t) {
    const double c = segment_cost(A, t, t + 8);
    if (c > best) best = c, arg = t;
  }
  CHECK(arg == 9);
  CHECK(compute_ck8max(A) == best);
  CHECK_THROWS_AS(dp_segment(Eigen::MatrixXd::Identity(12, 12)), DegenerateError);
}

TEST_CASE("dp examples") {
  const auto two_blocks = dp_segment(block_diagonal({8, 8}));
  CHECK(two_blocks.boundaries_bars == std::vector<int>{0, 8, 16});
  CHECK(barseg::testing::exhaustive_segmentation(block_diagonal({8, 8})).boundaries == two_blocks.boundaries_bars);
  CHECK(dp_segment(Eigen::MatrixXd::Ones(8, 8)).boundaries_bars == std::vector<int>{0, 8});
  CHECK(barseg::testing::exhaustive_segmentation(Eigen::MatrixXd::Ones(8, 8)).boundaries == std::vector<int>{0, 8});
  CHECK(dp_segment(Eigen::MatrixXd::Ones(1, 1)).boundaries_bars == std::vector<int>{0, 1});
}

TEST_CASE("dp agrees with exhaustive enumeration") {
  std::mt19937 gen(2024);
  for (unsigned trial = 0; trial < 30; ++trial) {
    const int b = 6 + static_cast<int>(gen() % 9);
    const auto A = barseg::testing::random_autosimilarity(b, 500 + trial);
    if (compute_ck8max(A) <= 0.0) continue;
    const auto dp = dp_segment(A);
    const auto oracle = barseg::testing::exhaustive_segmentation(A);
    CAPTURE(b);
    CHECK(std::abs(dp.total_score - oracle.score) <= 1e-12);
    CHECK(dp.boundaries_bars == oracle.boundaries);
  }
}

TEST_CASE("dp respects the maximum segment length") {
  const auto seg = dp_segment(Eigen::MatrixXd::Ones(40, 40), 8);
  for (std::size_t k = 1; k < seg.boundaries_bars.size(); ++k)
    CHECK(seg.boundaries_bars[k] - seg.boundaries_bars[k - 1] <= 8);
  CHECK(seg.boundaries_bars == std::vector<int>{0, 8, 16, 24, 32, 40});
  const auto small = barseg::testing::random_autosimilarity(12, 3);
  CHECK(dp_segment(small, 3).boundaries_bars == barseg::testing::exhaustive_segmentation(small, 3).boundaries);
}

TEST_CASE("boundaries are scale invariant") {
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Random(5, 30);
  const auto a = dp_segment(cosine_autosimilarity(Z));
  const auto b = dp_segment(cosine_autosimilarity(37.5 * Z));
  CHECK(a.boundaries_bars == b.boundaries_bars);
}

TEST_CASE("times come from the bar grid") {
  auto seg = dp_segment(block_diagonal({8, 8}));
  std::vector<double> db;
  for (int i = 0; i <= 16; ++i) db.push_back(0.5 + 2.0 * i);
  attach_times(seg, BarGrid(db));
  CHECK(seg.boundaries_seconds == std::vector<double>{0.5, 16.5, 32.5});
}

TEST_CASE("autosimilarity image mapping") {
  const auto img = autosimilarity_image(Eigen::MatrixXd::Identity(2, 2));
  CHECK(img.pixels == std::vector<std::uint8_t>{255, 128, 128, 255});
  const auto ones = autosimilarity_image(Eigen::MatrixXd::Ones(3, 3));
  for (auto p : ones.pixels) CHECK(p == 255);
  CHECK(autosimilarity_image(-Eigen::MatrixXd::Ones(1, 1)).pixels[0] == 0);
}
