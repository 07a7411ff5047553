#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clacorr/types.hpp"

namespace clacorr {

// Full agglomeration history.  Node numbering follows the usual convention:
// leaves are 0..N-1, the node created by merge step s is N+s.  region_id is
// carried through to clusterings cut from this tree.
struct Dendrogram {
  std::string region_id;
  std::vector<std::string> leaves;
  struct Merge {
    int left;       // child node id, left < right
    int right;
    double height;  // Ward distance at which the pair merged
    int size;       // leaves under the new node
  };
  std::vector<Merge> merges;  // N-1 entries, heights non-decreasing

  int leaf_count() const { return static_cast<int>(leaves.size()); }
  double root_height() const { return merges.empty() ? 0.0 : merges.back().height; }
};

// Agglomerative clustering with Ward's linkage on U-score geometry.  Initial
// inter-singleton distances are sqrt(2(1 - r)); merges use the Lance-Williams
// recurrence on squared distances, which reproduces the centroid-form Ward
// distance
//   D(v1,v2) = sqrt( 2|v1||v2|/(|v1|+|v2|) * ||c1 - c2||^2 )
// without materializing U-scores.  At every step the pair at minimal distance
// merges; ties break toward the lexicographically smallest (left, right) node
// id pair.
Dendrogram ward_dendrogram(const CorrelationMatrix& intra,
                           std::string region_id = "");

// Flat clustering containing every merge of height <= h (inclusive, so that
// cutting exactly at h_max keeps the clusters formed there).  h = 0 yields
// singletons; h >= root height yields one cluster.  Cluster ids are assigned
// contiguously from 0 in order of first appearance along the leaf order.
Clustering cut_dendrogram(const Dendrogram& d, double h);

// Partition after applying exactly the first N-k merges, i.e. the finest
// clustering with k clusters.  Unlike cut_dendrogram this is well-defined
// even when several merges share a height.  cut_height is the last applied
// merge height (0 for k = N).
Clustering cut_dendrogram_to_k(const Dendrogram& d, int k);

// Recommended cut-off: the maximum U-score distance within the region,
// sqrt(2(1 - min off-diagonal r)).  Single-voxel regions give 0.
double h_max(const CorrelationMatrix& intra);

// How a cut height is chosen when clustering a region.
struct HeightRule {
  enum class Kind { maxu, silhouette, fixed };
  Kind kind = Kind::maxu;
  double fixed_height = 0.0;

  static HeightRule parse(const std::string& text);  // "maxu" | "silhouette" | "fixed:<h>"
  std::string label() const;
};

struct HeightSelection {
  double height;
  Clustering clustering;
  double silhouette;  // mean silhouette of the winning cut
};

// Evaluates the mean silhouette score (U-score distances, points in
// non-singleton clusters) for every k-cluster cut with k in
// [k_min, k_max] and returns the best; ties resolve toward fewer clusters.
// k_max <= 0 means min(N-1, 50).
HeightSelection select_height_silhouette(const Dendrogram& d,
                                         const CorrelationMatrix& intra,
                                         int k_min = 2, int k_max = 0);

// Applies a height rule to one region's dendrogram.
Clustering apply_height_rule(const Dendrogram& d, const CorrelationMatrix& intra,
                             const HeightRule& rule);

// Lloyd's k-means over U-score rows with deterministic greedy farthest-point
// initialization (first center drawn from the seeded stream); at most 100
// iterations.
Clustering kmeans_clusters(const UScoreMatrix& u, int k, std::uint64_t seed,
                           std::string region_id = "");

// Uniform random assignment, made surjective by planting one voxel per
// cluster at seeded random positions.
Clustering random_clusters(const std::vector<std::string>& voxel_ids, int k,
                           std::uint64_t seed, std::string region_id = "");

}  // namespace clacorr
