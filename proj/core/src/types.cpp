#include "clacorr/types.hpp"

#include <unordered_set>

#include "clacorr/errors.hpp"

namespace clacorr {

void validate(const TimeSeriesMatrix& ts) {
  if (ts.region_id.empty())
    throw DomainError("time series matrix has empty region id");
  if (ts.values.rows() < 1)
    throw ShapeError("region " + ts.region_id + ": no voxels");
  if (ts.values.cols() < 3)
    throw ShapeError("region " + ts.region_id + ": need at least 3 time points, got " +
                     std::to_string(ts.values.cols()));
  if (static_cast<Eigen::Index>(ts.voxel_ids.size()) != ts.values.rows())
    throw ShapeError("region " + ts.region_id + ": " +
                     std::to_string(ts.voxel_ids.size()) + " voxel ids for " +
                     std::to_string(ts.values.rows()) + " rows");
  std::unordered_set<std::string> seen;
  for (const auto& id : ts.voxel_ids) {
    if (id.empty())
      throw ConsistencyError("region " + ts.region_id + ": empty voxel id");
    if (!seen.insert(id).second)
      throw ConsistencyError("region " + ts.region_id + ": duplicate voxel id " + id);
  }
  if (!ts.values.allFinite())
    throw DomainError("region " + ts.region_id + ": non-finite value in time series");
}

TimeSeriesMatrix make_timeseries(std::string region_id,
                                 std::vector<std::string> voxel_ids,
                                 Eigen::MatrixXd values) {
  TimeSeriesMatrix ts{std::move(region_id), std::move(voxel_ids), std::move(values)};
  validate(ts);
  return ts;
}

std::vector<std::vector<int>> cluster_members(const Clustering& c) {
  std::vector<std::vector<int>> members(c.n_clusters);
  for (std::size_t i = 0; i < c.assignments.size(); ++i)
    members[c.assignments[i]].push_back(static_cast<int>(i));
  return members;
}

}  // namespace clacorr
