#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "clacorr/clustering.hpp"
#include "clacorr/errors.hpp"
#include "clacorr/stats.hpp"
#include "support.hpp"

using namespace clacorr;

namespace {

CorrelationMatrix corr_from(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  CorrelationMatrix c;
  c.entries.resize(n, n);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) c.entries(i, j++) = v;
    ++i;
  }
  c.row_ids = testsup::voxel_ids("v", n);
  c.col_ids = c.row_ids;
  return c;
}

}  // namespace

TEST_CASE("two leaves merge at sqrt(2(1-r))") {
  const auto corr = corr_from({{1.0, 0.5}, {0.5, 1.0}});
  const Dendrogram d = ward_dendrogram(corr, "R");
  REQUIRE(d.merges.size() == 1);
  CHECK(d.merges[0].left == 0);
  CHECK(d.merges[0].right == 1);
  CHECK(d.merges[0].height == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.merges[0].size == 2);
}

TEST_CASE("three-voxel worked example: heights sqrt(0.2) and sqrt(7/3)") {
  // r12 = 0.9, r13 = r23 = 0.1.  First merge joins {0,1} at
  // sqrt(2(1-0.9)) = sqrt(0.2); the second joins the pair with voxel 2 at
  // sqrt(2*2*1/3 * ||c - U3||^2) = sqrt(7/3) since ||c - U3||^2 = 1.75.
  const auto corr =
      corr_from({{1.0, 0.9, 0.1}, {0.9, 1.0, 0.1}, {0.1, 0.1, 1.0}});
  const Dendrogram d = ward_dendrogram(corr, "R");
  REQUIRE(d.merges.size() == 2);
  CHECK(d.merges[0].left == 0);
  CHECK(d.merges[0].right == 1);
  CHECK(d.merges[0].height ==
        doctest::Approx(std::sqrt(0.2)).epsilon(1e-12));
  CHECK(d.merges[1].left == 2);
  CHECK(d.merges[1].right == 3);  // node 3 = first merge
  CHECK(d.merges[1].height ==
        doctest::Approx(std::sqrt(7.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("dendrogram structure invariants on random instances") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 11);
    const auto ts = testsup::random_timeseries(gen, n, 30 + n);
    const Dendrogram d = ward_dendrogram(pairwise_correlations(ts), "R");
    REQUIRE(static_cast<int>(d.merges.size()) == n - 1);

    double last = 0.0;
    std::set<int> used;
    for (int s = 0; s < n - 1; ++s) {
      const auto& m = d.merges[s];
      CHECK(m.height >= last);  // monotone
      last = m.height;
      CHECK(m.left < m.right);
      CHECK(m.right < n + s);
      CHECK(used.insert(m.left).second);   // every node consumed once
      CHECK(used.insert(m.right).second);
    }
    CHECK(d.merges.back().size == n);
  }
}

TEST_CASE("lance-williams agrees with the exhaustive centroid agglomerator") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 7);
    const auto ts = testsup::random_timeseries(gen, n, 20 + n);
    const Dendrogram fast = ward_dendrogram(pairwise_correlations(ts), "R");
    const Dendrogram slow = testsup::ward_reference(u_scores(ts), "R");
    REQUIRE(fast.merges.size() == slow.merges.size());
    for (std::size_t s = 0; s < fast.merges.size(); ++s) {
      CHECK(fast.merges[s].left == slow.merges[s].left);
      CHECK(fast.merges[s].right == slow.merges[s].right);
      CHECK(std::abs(fast.merges[s].height - slow.merges[s].height) <= 1e-8);
    }
  }
}

TEST_CASE("cut_dendrogram boundary is inclusive and labels by first appearance") {
  const auto corr =
      corr_from({{1.0, 0.9, 0.1}, {0.9, 1.0, 0.1}, {0.1, 0.1, 1.0}});
  const Dendrogram d = ward_dendrogram(corr, "R");

  const Clustering all_single = cut_dendrogram(d, 0.0);
  CHECK(all_single.n_clusters == 3);
  CHECK(all_single.assignments == std::vector<int>{0, 1, 2});

  // cutting exactly at the first merge height includes that merge
  const Clustering two = cut_dendrogram(d, d.merges[0].height);
  CHECK(two.n_clusters == 2);
  CHECK(two.assignments == std::vector<int>{0, 0, 1});

  const Clustering one = cut_dendrogram(d, d.root_height());
  CHECK(one.n_clusters == 1);
  CHECK(one.assignments == std::vector<int>{0, 0, 0});

  CHECK_THROWS_AS(cut_dendrogram(d, -0.1), DomainError);
  CHECK_THROWS_AS(cut_dendrogram(d, std::nan("")), DomainError);
}

TEST_CASE("cut_dendrogram_to_k spans the whole range") {
  std::mt19937_64 gen(29);
  const auto ts = testsup::random_timeseries(gen, 9, 40);
  const Dendrogram d = ward_dendrogram(pairwise_correlations(ts), "R");
  for (int k = 1; k <= 9; ++k) {
    const Clustering c = cut_dendrogram_to_k(d, k);
    CHECK(c.n_clusters == k);
  }
  CHECK_THROWS_AS(cut_dendrogram_to_k(d, 0), DomainError);
  CHECK_THROWS_AS(cut_dendrogram_to_k(d, 10), DomainError);
}

TEST_CASE("h_max is the distance of the weakest intra correlation") {
  const auto corr =
      corr_from({{1.0, 0.9, 0.1}, {0.9, 1.0, 0.1}, {0.1, 0.1, 1.0}});
  CHECK(h_max(corr) == doctest::Approx(std::sqrt(1.8)).epsilon(1e-15));
  // single voxel: no pairs, no spread
  const auto lone = corr_from({{1.0}});
  CHECK(h_max(lone) == 0.0);
}

TEST_CASE("every cluster of a cut meets the mean-correlation bound") {
  // mean intra-cluster correlation (diagonal included) >= 1 - h^2/2
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(gen() % 12);
    const auto ts = testsup::random_timeseries(gen, n, 25 + n);
    const CorrelationMatrix corr = pairwise_correlations(ts);
    const Dendrogram d = ward_dendrogram(corr, "R");
    for (int rep = 0; rep < 5; ++rep) {
      const double h = unif(gen) * d.root_height();
      const Clustering c = cut_dendrogram(d, h);
      for (const auto& members : cluster_members(c)) {
        double sum = 0.0;
        for (int i : members)
          for (int j : members) sum += corr.entries(i, j);
        const double mean = sum / (static_cast<double>(members.size()) *
                                   static_cast<double>(members.size()));
        CHECK(mean >= 1.0 - h * h / 2.0 - 1e-12);
      }
    }
  }
}

TEST_CASE("ward_dendrogram validates its input") {
  CorrelationMatrix bad;
  bad.entries.resize(2, 3);
  bad.entries.setZero();
  CHECK_THROWS_AS(ward_dendrogram(bad), ShapeError);

  auto asym = corr_from({{1.0, 0.5}, {0.2, 1.0}});
  CHECK_THROWS_AS(ward_dendrogram(asym), DomainError);

  auto diag = corr_from({{0.8, 0.5}, {0.5, 1.0}});
  CHECK_THROWS_AS(ward_dendrogram(diag), DomainError);
}

TEST_CASE("silhouette selection: all ties collapse to the smallest k") {
  // every off-diagonal correlation equal -> every cut scores 0, so the
  // first candidate (k = 2) wins
  const auto corr = corr_from({{1.0, 0.5, 0.5, 0.5},
                               {0.5, 1.0, 0.5, 0.5},
                               {0.5, 0.5, 1.0, 0.5},
                               {0.5, 0.5, 0.5, 1.0}});
  const Dendrogram d = ward_dendrogram(corr, "R");
  const HeightSelection sel = select_height_silhouette(d, corr);
  CHECK(sel.clustering.n_clusters == 2);
}

TEST_CASE("silhouette selection recovers planted two-group structure") {
  std::mt19937_64 gen(43);
  std::normal_distribution<double> normal;
  const int n_time = 120;
  Eigen::MatrixXd values(8, n_time);
  Eigen::RowVectorXd f1(n_time), f2(n_time);
  for (int t = 0; t < n_time; ++t) {
    f1(t) = normal(gen);
    f2(t) = normal(gen);
  }
  for (int i = 0; i < 8; ++i) {
    const auto& f = i < 4 ? f1 : f2;
    for (int t = 0; t < n_time; ++t) values(i, t) = 3.0 * f(t) + normal(gen);
  }
  const auto ts = make_timeseries("R", testsup::voxel_ids("v", 8), values);
  const CorrelationMatrix corr = pairwise_correlations(ts);
  const Dendrogram d = ward_dendrogram(corr, "R");
  const HeightSelection sel = select_height_silhouette(d, corr);
  CHECK(sel.clustering.n_clusters == 2);
  CHECK(sel.clustering.assignments ==
        std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
  CHECK(sel.silhouette > 0.2);
}

TEST_CASE("silhouette selection degenerate inputs") {
  const auto pairc = corr_from({{1.0, 0.5}, {0.5, 1.0}});
  const Dendrogram two = ward_dendrogram(pairc, "R");
  // k range [2, min(N-1, 50)] is empty for N = 2
  CHECK_THROWS_AS(select_height_silhouette(two, pairc),
                  DegenerateClusteringError);
}

TEST_CASE("height rules parse and label") {
  CHECK(HeightRule::parse("maxu").kind == HeightRule::Kind::maxu);
  CHECK(HeightRule::parse("silhouette").kind == HeightRule::Kind::silhouette);
  const HeightRule fixed = HeightRule::parse("fixed:1.25");
  CHECK(fixed.kind == HeightRule::Kind::fixed);
  CHECK(fixed.fixed_height == 1.25);
  CHECK(fixed.label() == "fixed:1.25");
  CHECK(HeightRule::parse("maxu").label() == "maxu");
  CHECK_THROWS_AS(HeightRule::parse("banana"), ConfigError);
  CHECK_THROWS_AS(HeightRule::parse("fixed:"), ConfigError);
  CHECK_THROWS_AS(HeightRule::parse("fixed:abc"), ConfigError);
  CHECK_THROWS_AS(HeightRule::parse("fixed:-1"), ConfigError);
}

TEST_CASE("apply_height_rule matches its components") {
  std::mt19937_64 gen(59);
  const auto ts = testsup::random_timeseries(gen, 10, 50);
  const CorrelationMatrix corr = pairwise_correlations(ts);
  const Dendrogram d = ward_dendrogram(corr, "R");

  const Clustering via_rule =
      apply_height_rule(d, corr, HeightRule::parse("maxu"));
  const Clustering direct = cut_dendrogram(d, h_max(corr));
  CHECK(via_rule.assignments == direct.assignments);

  const Clustering fixed0 =
      apply_height_rule(d, corr, HeightRule::parse("fixed:0"));
  CHECK(fixed0.n_clusters == 10);
}

TEST_CASE("kmeans is deterministic and recovers separated blobs") {
  std::mt19937_64 gen(61);
  std::normal_distribution<double> normal;
  const int n_time = 200;
  Eigen::MatrixXd values(10, n_time);
  Eigen::RowVectorXd f1(n_time), f2(n_time);
  for (int t = 0; t < n_time; ++t) {
    f1(t) = normal(gen);
    f2(t) = normal(gen);
  }
  for (int i = 0; i < 10; ++i) {
    const auto& f = i % 2 == 0 ? f1 : f2;  // interleave the two groups
    for (int t = 0; t < n_time; ++t) values(i, t) = 4.0 * f(t) + normal(gen);
  }
  const auto ts = make_timeseries("R", testsup::voxel_ids("v", 10), values);
  const UScoreMatrix u = u_scores(ts);

  const Clustering c1 = kmeans_clusters(u, 2, 999, "R");
  const Clustering c2 = kmeans_clusters(u, 2, 999, "R");
  CHECK(c1.assignments == c2.assignments);
  // first-appearance labeling: voxel 0 is always in cluster 0
  CHECK(c1.assignments[0] == 0);
  CHECK(c1.assignments == std::vector<int>{0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  CHECK_FALSE(c1.from_cut());

  CHECK(kmeans_clusters(u, 1, 0).n_clusters == 1);
  CHECK(kmeans_clusters(u, 10, 0).n_clusters == 10);
  CHECK_THROWS_AS(kmeans_clusters(u, 0, 0), DomainError);
  CHECK_THROWS_AS(kmeans_clusters(u, 11, 0), DomainError);
}

TEST_CASE("random_clusters is surjective and seed-deterministic") {
  const auto ids = testsup::voxel_ids("v", 12);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Clustering c = random_clusters(ids, 4, seed, "R");
    REQUIRE(c.n_clusters == 4);
    std::set<int> seen(c.assignments.begin(), c.assignments.end());
    CHECK(seen == std::set<int>{0, 1, 2, 3});
  }
  const Clustering a = random_clusters(ids, 4, 7, "R");
  const Clustering b = random_clusters(ids, 4, 7, "R");
  CHECK(a.assignments == b.assignments);
  const Clustering other = random_clusters(ids, 4, 8, "R");
  CHECK(a.assignments != other.assignments);  // overwhelmingly likely
  CHECK_THROWS_AS(random_clusters(ids, 0, 0), DomainError);
  CHECK_THROWS_AS(random_clusters(ids, 13, 0), DomainError);
}
