#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "clacorr/errors.hpp"
#include "clacorr/stats.hpp"
#include "support.hpp"

using namespace clacorr;

TEST_CASE("sample_correlation matches the hand-computed fraction") {
  const std::vector<double> x{1.0, 2.0, 4.0, 3.0};
  const std::vector<double> y{2.0, 1.0, 3.0, 4.0};
  // moments: sxy = 3, sxx = 5, syy = 5 -> r = 3/5
  CHECK(sample_correlation(x, y) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("sample_correlation endpoints") {
  const std::vector<double> x{1.0, 2.0, 3.0, 7.0};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v - 2.0);
  CHECK(sample_correlation(x, y) == doctest::Approx(1.0).epsilon(1e-15));
  for (auto& v : y) v = -v;
  CHECK(sample_correlation(x, y) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("sample_correlation rejects constant and too-short input") {
  const std::vector<double> c{4.0, 4.0, 4.0};
  const std::vector<double> x{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(sample_correlation(c, x), ZeroVarianceError);
  CHECK_THROWS_AS(sample_correlation(x, c), ZeroVarianceError);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(sample_correlation(one, one), ShapeError);
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(sample_correlation(two, x), ShapeError);
}

TEST_CASE("sample_correlation treats tiny relative wiggle as constant") {
  // centered norm is ~1e-16 of the raw norm, far below the 1e-14 threshold
  const std::vector<double> x{1.0, 1.0 + 1e-16, 1.0 - 1e-16, 1.0};
  const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(sample_correlation(x, y), ZeroVarianceError);
}

TEST_CASE("u_scores reproduce correlations as inner products and distances") {
  std::mt19937_64 gen(101);
  const auto ts = testsup::random_timeseries(gen, 7, 25);
  const UScoreMatrix u = u_scores(ts);
  REQUIRE(u.scores.rows() == 7);
  REQUIRE(u.scores.cols() == 24);
  const CorrelationMatrix r = pairwise_correlations(ts);

  for (int i = 0; i < 7; ++i) {
    CHECK(u.scores.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 0; j < 7; ++j) {
      const double inner = u.scores.row(i).dot(u.scores.row(j));
      CHECK(std::abs(inner - r.entries(i, j)) <= 1e-12);
      const double d2 = (u.scores.row(i) - u.scores.row(j)).squaredNorm();
      CHECK(std::abs(d2 - 2.0 * (1.0 - r.entries(i, j))) <= 1e-12);
    }
  }
}

TEST_CASE("u_scores rejects zero-variance rows with the voxel id") {
  Eigen::MatrixXd values(2, 5);
  values.row(0) << 1, 2, 3, 4, 5;
  values.row(1).setConstant(2.5);
  auto ts = make_timeseries("R", {"good", "flat"}, values);
  CHECK_THROWS_WITH_AS(u_scores(ts), doctest::Contains("flat"),
                       ZeroVarianceError);
}

TEST_CASE("pairwise_correlations cross version matches scalar correlations") {
  std::mt19937_64 gen(77);
  const auto a = testsup::random_timeseries(gen, 4, 30, "A");
  const auto b = testsup::random_timeseries(gen, 5, 30, "B");
  const CorrelationMatrix r = pairwise_correlations(a, b);
  REQUIRE(r.entries.rows() == 4);
  REQUIRE(r.entries.cols() == 5);
  CHECK(r.row_ids == a.voxel_ids);
  CHECK(r.col_ids == b.voxel_ids);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> xi(a.values.row(i).begin(), a.values.row(i).end());
    for (int j = 0; j < 5; ++j) {
      std::vector<double> yj(b.values.row(j).begin(), b.values.row(j).end());
      CHECK(std::abs(r.entries(i, j) - sample_correlation(xi, yj)) <= 1e-13);
    }
  }
}

TEST_CASE("pairwise_correlations intra version is symmetric with unit diagonal") {
  std::mt19937_64 gen(78);
  const auto a = testsup::random_timeseries(gen, 6, 40, "A");
  const CorrelationMatrix r = pairwise_correlations(a);
  CHECK((r.entries - r.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 6; ++i) CHECK(r.entries(i, i) == 1.0);
  CHECK(r.entries.maxCoeff() <= 1.0);
  CHECK(r.entries.minCoeff() >= -1.0);
}

TEST_CASE("duplicate rows correlate to exactly 1") {
  Eigen::MatrixXd values(2, 6);
  values.row(0) << 0.4, -1.2, 2.2, 0.0, 1.1, -0.5;
  values.row(1) = values.row(0);
  const auto ts = make_timeseries("R", {"v0", "v1"}, values);
  const CorrelationMatrix r = pairwise_correlations(ts);
  CHECK(r.entries(0, 1) == 1.0);
}

TEST_CASE("correlation_to_distance endpoints and domain") {
  CHECK(correlation_to_distance(1.0) == 0.0);
  CHECK(correlation_to_distance(-1.0) == 2.0);
  CHECK(correlation_to_distance(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  // values inside the tolerance band are clamped, not rejected
  CHECK(correlation_to_distance(1.0 + 1e-13) == 0.0);
  CHECK(correlation_to_distance(-1.0 - 1e-13) == 2.0);
  CHECK_THROWS_AS(correlation_to_distance(1.1), DomainError);
  CHECK_THROWS_AS(correlation_to_distance(-1.0001), DomainError);
  CHECK_THROWS_AS(correlation_to_distance(std::nan("")), DomainError);
}

TEST_CASE("u_scores requires at least three time points") {
  Eigen::MatrixXd values(2, 3);
  values << 1, 2, 4, 2, 1, 3;
  const auto ts = make_timeseries("R", {"v0", "v1"}, values);
  const UScoreMatrix u = u_scores(ts);  // n = 3 is the minimum
  CHECK(u.scores.cols() == 2);
  Eigen::MatrixXd too_short(2, 2);
  too_short << 1, 2, 2, 1;
  CHECK_THROWS_AS(make_timeseries("R", {"v0", "v1"}, too_short), ShapeError);
}
