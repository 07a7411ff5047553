#include "clacorr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "clacorr/errors.hpp"
#include "clacorr/stats.hpp"

namespace clacorr {

namespace {

void check_pair(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b,
                const char* op) {
  if (a.region_id == b.region_id)
    throw DomainError(std::string(op) + ": regions must be distinct, both are '" +
                      a.region_id + "'");
  if (a.time_count() != b.time_count())
    throw ShapeError(std::string(op) + ": time axes differ, " +
                     std::to_string(a.time_count()) + " vs " +
                     std::to_string(b.time_count()));
}

// Averages the rows of each cluster; output row c is the average series of
// cluster c.  The clustering may list voxels in any order, matched by id.
Eigen::MatrixXd cluster_average_series(const TimeSeriesMatrix& ts,
                                       const Clustering& c) {
  if (c.voxel_ids.size() != static_cast<std::size_t>(ts.voxel_count()))
    throw ConsistencyError("clustering for region " + ts.region_id + " covers " +
                           std::to_string(c.voxel_ids.size()) + " voxels, data has " +
                           std::to_string(ts.voxel_count()));
  std::unordered_map<std::string, Eigen::Index> row_of;
  row_of.reserve(ts.voxel_ids.size());
  for (Eigen::Index i = 0; i < ts.voxel_count(); ++i) row_of[ts.voxel_ids[i]] = i;
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(c.n_clusters, ts.time_count());
  std::vector<int> count(c.n_clusters, 0);
  std::vector<char> used(ts.voxel_count(), 0);
  for (std::size_t i = 0; i < c.voxel_ids.size(); ++i) {
    auto it = row_of.find(c.voxel_ids[i]);
    if (it == row_of.end())
      throw ConsistencyError("clustering for region " + ts.region_id +
                             " names unknown voxel " + c.voxel_ids[i]);
    if (used[it->second])
      throw ConsistencyError("clustering for region " + ts.region_id +
                             " lists voxel " + c.voxel_ids[i] + " twice");
    used[it->second] = 1;
    avg.row(c.assignments[i]) += ts.values.row(it->second);
    ++count[c.assignments[i]];
  }
  for (int k = 0; k < c.n_clusters; ++k) {
    if (count[k] == 0)
      throw ConsistencyError("clustering for region " + ts.region_id +
                             ": empty cluster " + std::to_string(k));
    avg.row(k) /= static_cast<double>(count[k]);
  }
  return avg;
}

std::vector<std::string> cluster_labels(int k) {
  std::vector<std::string> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back("cluster" + std::to_string(i));
  return out;
}

double bracket_term(const GroundTruthParams::Region& reg,
                    std::span<const int> members, const std::string& label) {
  if (reg.sigma2 <= 0.0)
    throw DomainError("limit oracle: sigma2 must be positive for region " + label);
  if (reg.gamma2 < 0.0)
    throw DomainError("limit oracle: gamma2 must be nonnegative for region " + label);
  const double m = static_cast<double>(members.size());
  double eta_sum = 0.0;
  if (members.size() == 1) {
    eta_sum = 1.0;  // eta_ii, no intra matrix needed
  } else {
    const auto& eta = reg.intra;
    for (int i : members) {
      if (i < 0 || i >= eta.rows())
        throw DomainError("limit oracle: cluster member " + std::to_string(i) +
                          " outside intra matrix for region " + label);
      for (int j : members) eta_sum += eta(i, j);
    }
  }
  return eta_sum / (m * m) + reg.gamma2 / (m * reg.sigma2);
}

}  // namespace

double estimate_ac(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b) {
  check_pair(a, b, "estimate_ac");
  return pairwise_correlations(a, b).entries.mean();
}

double estimate_ca(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b) {
  check_pair(a, b, "estimate_ca");
  const Eigen::VectorXd ya = a.values.colwise().mean();
  const Eigen::VectorXd yb = b.values.colwise().mean();
  try {
    return sample_correlation({ya.data(), static_cast<std::size_t>(ya.size())},
                              {yb.data(), static_cast<std::size_t>(yb.size())});
  } catch (const ZeroVarianceError&) {
    throw ZeroVarianceError("regional average of " + a.region_id + " or " +
                            b.region_id);
  }
}

CorrelationMatrix cluster_pair_correlations(const TimeSeriesMatrix& a,
                                            const TimeSeriesMatrix& b,
                                            const Clustering& ca,
                                            const Clustering& cb) {
  check_pair(a, b, "cluster_pair_correlations");
  const Eigen::MatrixXd avg_a = cluster_average_series(a, ca);
  const Eigen::MatrixXd avg_b = cluster_average_series(b, cb);
  const auto labels_a = cluster_labels(ca.n_clusters);
  const auto labels_b = cluster_labels(cb.n_clusters);
  const Eigen::MatrixXd na = centered_unit_rows(avg_a, labels_a, a.region_id);
  const Eigen::MatrixXd nb = centered_unit_rows(avg_b, labels_b, b.region_id);
  CorrelationMatrix out{labels_a, labels_b, na * nb.transpose()};
  clamp_correlations(out.entries, "cluster_pair_correlations(" + a.region_id +
                                      "," + b.region_id + ")");
  return out;
}

EstimateSet estimate_cla(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b,
                         const Clustering& ca, const Clustering& cb) {
  const CorrelationMatrix pairs = cluster_pair_correlations(a, b, ca, cb);
  EstimateSet out;
  out.region_pair = {a.region_id, b.region_id};
  out.n_clusters = {ca.n_clusters, cb.n_clusters};
  out.cluster_pair_estimates.reserve(
      static_cast<std::size_t>(ca.n_clusters) * cb.n_clusters);
  for (int i = 0; i < ca.n_clusters; ++i)
    for (int j = 0; j < cb.n_clusters; ++j)
      out.cluster_pair_estimates.push_back({i, j, pairs.entries(i, j)});
  out.cla_point = pairs.entries.mean();
  out.ac_point = estimate_ac(a, b);
  out.ca_point = estimate_ca(a, b);
  return out;
}

const GroundTruthParams::Region& GroundTruthParams::region(
    const std::string& label) const {
  auto it = regions.find(label);
  if (it == regions.end())
    throw DomainError("no ground-truth parameters for region " + label);
  return it->second;
}

double GroundTruthParams::rho_of(const std::string& a,
                                 const std::string& b) const {
  auto key = a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  auto it = rho.find(key);
  if (it == rho.end())
    throw DomainError("no ground-truth inter-correlation for pair (" + a + ", " +
                      b + ")");
  return it->second;
}

double limit_voxel(const GroundTruthParams& p, const std::string& region_a,
                   const std::string& region_b) {
  static const int kSingle[1] = {0};
  return limit_cla(p, region_a, region_b, kSingle, kSingle);
}

double limit_ca(const GroundTruthParams& p, const std::string& region_a,
                const std::string& region_b) {
  const auto& ra = p.region(region_a);
  const auto& rb = p.region(region_b);
  std::vector<int> all_a(ra.intra.rows()), all_b(rb.intra.rows());
  for (std::size_t i = 0; i < all_a.size(); ++i) all_a[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < all_b.size(); ++i) all_b[i] = static_cast<int>(i);
  return limit_cla(p, region_a, region_b, all_a, all_b);
}

double limit_cla(const GroundTruthParams& p, const std::string& region_a,
                 const std::string& region_b, std::span<const int> members_a,
                 std::span<const int> members_b) {
  if (members_a.empty() || members_b.empty())
    throw DomainError("limit oracle: empty cluster");
  const double ta = bracket_term(p.region(region_a), members_a, region_a);
  const double tb = bracket_term(p.region(region_b), members_b, region_b);
  return p.rho_of(region_a, region_b) / std::sqrt(ta * tb);
}

double limit_cla(const GroundTruthParams& p, const Clustering& ca,
                 const Clustering& cb) {
  const auto members_a = cluster_members(ca);
  const auto members_b = cluster_members(cb);
  double sum = 0.0;
  for (const auto& ma : members_a)
    for (const auto& mb : members_b)
      sum += limit_cla(p, ca.region_id, cb.region_id, ma, mb);
  return sum / (static_cast<double>(members_a.size()) * members_b.size());
}

}  // namespace clacorr
