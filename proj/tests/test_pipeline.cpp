#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "clacorr/errors.hpp"
#include "clacorr/pipeline.hpp"
#include "clacorr/stats.hpp"
#include "support.hpp"

using namespace clacorr;
namespace fs = std::filesystem;

namespace {

std::vector<TimeSeriesMatrix> three_regions(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<TimeSeriesMatrix> out;
  out.push_back(testsup::random_timeseries(gen, 5, 60, "C"));
  out.push_back(testsup::random_timeseries(gen, 4, 60, "A"));
  out.push_back(testsup::random_timeseries(gen, 6, 60, "B"));
  return out;
}

}  // namespace

TEST_CASE("pipeline over three regions: sorted pairs, ac/ca/cla rows") {
  const auto regions = three_regions(1);
  PipelineOptions opt;
  const PipelineResult result = run_pipeline(regions, opt);

  REQUIRE(result.clusterings.size() == 3);
  CHECK(result.clusterings[0].region_id == "A");
  CHECK(result.clusterings[1].region_id == "B");
  CHECK(result.clusterings[2].region_id == "C");

  REQUIRE(result.estimates.size() == 9);  // 3 pairs x 3 estimators
  const char* expected[][3] = {{"A", "B", "ac"}, {"A", "B", "ca"},
                               {"A", "B", "cla"}, {"A", "C", "ac"},
                               {"A", "C", "ca"}, {"A", "C", "cla"},
                               {"B", "C", "ac"}, {"B", "C", "ca"},
                               {"B", "C", "cla"}};
  for (int i = 0; i < 9; ++i) {
    CHECK(result.estimates[i].region_a == expected[i][0]);
    CHECK(result.estimates[i].region_b == expected[i][1]);
    CHECK(result.estimates[i].estimator == expected[i][2]);
  }
  CHECK(result.distributions.size() == 3);
  CHECK(result.heights.size() == 3);
  // maxu rule: the used height is h_max itself
  for (const auto& h : result.heights) CHECK(h.h_used == h.h_max);
}

TEST_CASE("pipeline with two single-voxel regions: all estimators agree") {
  std::mt19937_64 gen(2);
  std::vector<TimeSeriesMatrix> regions;
  regions.push_back(testsup::random_timeseries(gen, 1, 30, "A"));
  regions.push_back(testsup::random_timeseries(gen, 1, 30, "B"));
  PipelineOptions opt;
  const PipelineResult result = run_pipeline(regions, opt);
  REQUIRE(result.estimates.size() == 3);
  const double ac = result.estimates[0].value;
  CHECK(result.estimates[1].value == doctest::Approx(ac).epsilon(1e-12));
  CHECK(result.estimates[2].value == doctest::Approx(ac).epsilon(1e-12));
}

TEST_CASE("pipeline is thread-count invariant") {
  const auto regions = three_regions(3);
  PipelineOptions serial;
  serial.threads = 1;
  PipelineOptions parallel;
  parallel.threads = 4;
  const PipelineResult a = run_pipeline(regions, serial);
  const PipelineResult b = run_pipeline(regions, parallel);
  REQUIRE(a.estimates.size() == b.estimates.size());
  for (std::size_t i = 0; i < a.estimates.size(); ++i)
    CHECK(a.estimates[i].value == b.estimates[i].value);  // bitwise equal
}

TEST_CASE("pipeline estimator selection and height rules") {
  const auto regions = three_regions(4);
  PipelineOptions opt;
  opt.want_ca = false;
  opt.want_cla = false;
  const PipelineResult result = run_pipeline(regions, opt);
  REQUIRE(result.estimates.size() == 3);
  for (const auto& e : result.estimates) CHECK(e.estimator == "ac");
  CHECK(result.distributions.empty());
  CHECK(result.heights.size() == 3);  // clustering still reported

  PipelineOptions fixed0;
  fixed0.height = HeightRule::parse("fixed:0");
  const PipelineResult singles = run_pipeline(regions, fixed0);
  for (const auto& h : singles.heights) CHECK(h.n_clusters >= 4);
  // with singleton clusters, cla collapses to ac
  CHECK(singles.estimates[2].value ==
        doctest::Approx(singles.estimates[0].value).epsilon(1e-12));
}

TEST_CASE("pipeline rejects inconsistent region sets") {
  const auto regions = three_regions(5);
  PipelineOptions opt;

  auto dup = regions;
  dup[1].region_id = "C";
  CHECK_THROWS_AS(run_pipeline(dup, opt), ConsistencyError);

  auto ragged = regions;
  ragged[2].values.conservativeResize(Eigen::NoChange, 30);
  CHECK_THROWS_AS(run_pipeline(ragged, opt), ShapeError);

  CHECK_THROWS_AS(run_pipeline(std::span<const TimeSeriesMatrix>{}, opt),
                  ConsistencyError);
}

TEST_CASE("write_pipeline_outputs emits the four artifact files") {
  const auto regions = three_regions(6);
  PipelineOptions opt;
  const PipelineResult result = run_pipeline(regions, opt);

  const fs::path dir =
      fs::temp_directory_path() /
      ("clacorr_pipe_" + std::to_string(std::random_device{}()));
  write_pipeline_outputs(dir, result, opt);

  for (const char* name :
       {"clusters.csv", "heights.csv", "estimates.csv", "cla_distribution.csv"})
    CHECK(fs::exists(dir / name));

  std::ifstream est(dir / "estimates.csv");
  std::string header;
  std::getline(est, header);
  CHECK(header == "region_a,region_b,estimator,value");

  std::error_code ec;
  fs::remove_all(dir, ec);
}
