#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace clacorr {

// One region's data: N voxel series of n time points each, rows aligned with
// voxel_ids.  Values are raw (not centered or scaled).
struct TimeSeriesMatrix {
  std::string region_id;
  std::vector<std::string> voxel_ids;
  Eigen::MatrixXd values;  // N x n

  Eigen::Index voxel_count() const { return values.rows(); }
  Eigen::Index time_count() const { return values.cols(); }
};

// Throws ShapeError / DomainError / ConsistencyError when the matrix violates
// its contract: nonempty region id, at least one voxel, at least three time
// points, unique nonempty voxel ids matching the row count, finite values.
void validate(const TimeSeriesMatrix& ts);

TimeSeriesMatrix make_timeseries(std::string region_id,
                                 std::vector<std::string> voxel_ids,
                                 Eigen::MatrixXd values);

// Pairwise correlations with labeled axes.  Square + symmetric with unit
// diagonal when both axes come from the same region.
struct CorrelationMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Eigen::MatrixXd entries;

  bool square() const { return entries.rows() == entries.cols(); }
};

// Row-wise U-scores: row i is the (n-1)-dimensional unit vector whose inner
// products reproduce sample correlations, scores * scores^T == corr.
struct UScoreMatrix {
  std::vector<std::string> voxel_ids;
  Eigen::MatrixXd scores;  // N x (n-1)
};

// Hard cluster assignment for one region.  assignments[i] is the cluster id
// of voxel_ids[i]; ids are contiguous from 0.  cut_height is the dendrogram
// cut that produced the assignment, or negative when the clustering was
// formed by fixing k directly (k-means, random assignment).
struct Clustering {
  std::string region_id;
  std::vector<std::string> voxel_ids;
  std::vector<int> assignments;
  double cut_height = -1.0;
  int n_clusters = 0;

  bool from_cut() const { return cut_height >= 0.0; }
};

std::vector<std::vector<int>> cluster_members(const Clustering& c);

}  // namespace clacorr
