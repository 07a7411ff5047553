#pragma once

// Shared test helpers: deterministic random instances and a brute-force
// reference agglomerator that evaluates the centroid form of the Ward
// distance directly, used to cross-check the Lance-Williams implementation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "clacorr/clustering.hpp"
#include "clacorr/stats.hpp"
#include "clacorr/types.hpp"

namespace testsup {

inline std::vector<std::string> voxel_ids(const std::string& prefix, int n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Gaussian series; `common_weight` mixes in one shared factor so pairwise
// correlations are spread over (0, 1) instead of hugging 0.
inline clacorr::TimeSeriesMatrix random_timeseries(std::mt19937_64& gen,
                                                   int n_voxels, int n_time,
                                                   const std::string& region = "R",
                                                   double common_weight = 0.6) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd values(n_voxels, n_time);
  Eigen::RowVectorXd shared(n_time);
  for (int t = 0; t < n_time; ++t) shared(t) = normal(gen);
  for (int i = 0; i < n_voxels; ++i)
    for (int t = 0; t < n_time; ++t)
      values(i, t) = common_weight * shared(t) + normal(gen);
  return clacorr::make_timeseries(region, voxel_ids(region, n_voxels),
                                  std::move(values));
}

inline clacorr::Clustering singleton_clustering(const clacorr::TimeSeriesMatrix& ts) {
  clacorr::Clustering c;
  c.region_id = ts.region_id;
  c.voxel_ids = ts.voxel_ids;
  c.assignments.resize(ts.voxel_count());
  for (int i = 0; i < ts.voxel_count(); ++i) c.assignments[i] = i;
  c.n_clusters = ts.voxel_count();
  c.cut_height = 0.0;
  return c;
}

inline clacorr::Clustering whole_region_clustering(const clacorr::TimeSeriesMatrix& ts) {
  clacorr::Clustering c;
  c.region_id = ts.region_id;
  c.voxel_ids = ts.voxel_ids;
  c.assignments.assign(ts.voxel_count(), 0);
  c.n_clusters = 1;
  c.cut_height = 0.0;
  return c;
}

// Exhaustive agglomerator: keeps explicit U-score centroids and merges the
// pair minimizing
//   D^2 = 2 |c1||c2| / (|c1|+|c2|) * ||mean(U_1) - mean(U_2)||^2,
// with the production tie-break (lexicographically smallest node-id pair)
// and node numbering (leaves 0..N-1, merge s creates node N+s).
inline clacorr::Dendrogram ward_reference(const clacorr::UScoreMatrix& u,
                                          std::string region_id = "") {
  const int n = static_cast<int>(u.scores.rows());
  clacorr::Dendrogram out{std::move(region_id), u.voxel_ids, {}};
  if (n <= 1) return out;

  struct Node {
    int id;
    double count;
    Eigen::RowVectorXd centroid;
  };
  std::vector<Node> nodes;
  nodes.reserve(n);
  for (int i = 0; i < n; ++i)
    nodes.push_back({i, 1.0, u.scores.row(i)});

  for (int step = 0; step < n - 1; ++step) {
    std::size_t pick_a = 0, pick_b = 1;
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_key{-1, -1};
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = a + 1; b < nodes.size(); ++b) {
        const double d2 = 2.0 * nodes[a].count * nodes[b].count /
                          (nodes[a].count + nodes[b].count) *
                          (nodes[a].centroid - nodes[b].centroid).squaredNorm();
        const std::pair<int, int> key{std::min(nodes[a].id, nodes[b].id),
                                      std::max(nodes[a].id, nodes[b].id)};
        if (d2 < best || (d2 == best && key < best_key)) {
          best = d2;
          best_key = key;
          pick_a = a;
          pick_b = b;
        }
      }
    }
    Node& na = nodes[pick_a];
    Node& nb = nodes[pick_b];
    out.merges.push_back({best_key.first, best_key.second,
                          std::sqrt(std::max(best, 0.0)),
                          static_cast<int>(na.count + nb.count)});
    na.centroid = (na.count * na.centroid + nb.count * nb.centroid) /
                  (na.count + nb.count);
    na.count += nb.count;
    na.id = n + step;
    nodes.erase(nodes.begin() + pick_b);
  }
  return out;
}

}  // namespace testsup
