#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clacorr/types.hpp"

namespace clacorr {

// Per-region-pair output: the full cluster-pair correlation distribution and
// the three point estimates computed from the same data.
struct EstimateSet {
  std::pair<std::string, std::string> region_pair;
  struct ClusterPair {
    int cluster_a;
    int cluster_b;
    double r;
  };
  std::vector<ClusterPair> cluster_pair_estimates;  // a-major, b-minor order
  double cla_point = 0.0;  // mean of cluster_pair_estimates
  double ac_point = 0.0;   // mean over all voxel pairs
  double ca_point = 0.0;   // correlation of regional average series
  std::pair<int, int> n_clusters{0, 0};
};

// Ensemble estimator: mean of all cross-region voxel-pair correlations.
double estimate_ac(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b);

// Correlation of the two regional spatial-average series.
double estimate_ca(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b);

// Correlations of all cluster-average series pairs (rows: clusters of a,
// cols: clusters of b).  Shared by estimate_cla and the error-surface sweep.
CorrelationMatrix cluster_pair_correlations(const TimeSeriesMatrix& a,
                                            const TimeSeriesMatrix& b,
                                            const Clustering& ca,
                                            const Clustering& cb);

// Cluster-level estimator: correlates within-cluster average series per
// cluster pair and averages into the regional point estimate; also fills the
// AC and CA points for the same data.  Regions must be distinct and each
// clustering must partition exactly its region's voxel ids.
EstimateSet estimate_cla(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b,
                         const Clustering& ca, const Clustering& cb);

// Ground-truth model parameters for synthetic scenarios, keyed by region
// label.  intra holds the latent intra-correlation matrix (unit diagonal);
// inter-correlations are constant per region pair.
struct GroundTruthParams {
  struct Region {
    double sigma2 = 1.0;
    double gamma2 = 0.0;
    Eigen::MatrixXd intra;
  };
  std::map<std::string, Region> regions;
  std::map<std::pair<std::string, std::string>, double> rho;  // key: sorted pair

  const Region& region(const std::string& label) const;
  double rho_of(const std::string& a, const std::string& b) const;
};

// Almost-sure limit of a single voxel-pair correlation:
//   rho sigma_a sigma_b / sqrt((sigma_a^2+gamma_a^2)(sigma_b^2+gamma_b^2)).
double limit_voxel(const GroundTruthParams& p, const std::string& region_a,
                   const std::string& region_b);

// Limit of the correlation-of-averages estimator; the denominator brackets
// are N^-2 sum(eta) + gamma^2/(N sigma^2) per region.
double limit_ca(const GroundTruthParams& p, const std::string& region_a,
                const std::string& region_b);

// Limit of the cluster-pair estimator for fixed clusters; members index into
// the region's intra matrix.  Reduces to limit_voxel for singletons and to
// limit_ca for whole regions.
double limit_cla(const GroundTruthParams& p, const std::string& region_a,
                 const std::string& region_b, std::span<const int> members_a,
                 std::span<const int> members_b);

// Regional version: mean of the cluster-pair limits over all cluster pairs.
// Clusterings must be index-aligned with the intra matrices.
double limit_cla(const GroundTruthParams& p, const Clustering& ca,
                 const Clustering& cb);

}  // namespace clacorr
