#pragma once

#include <span>
#include <string>
#include <vector>

#include "clacorr/clustering.hpp"
#include "clacorr/estimators.hpp"
#include "clacorr/synthetic.hpp"

namespace clacorr {

// Mean squared deviation of the cluster-pair estimates from the true
// inter-correlation.
double cluster_level_error(const EstimateSet& est, double rho_true);

// One estimator/clustering combination evaluated by the benchmark harness.
// The clustering algorithm only applies to the cla estimator; kmeans and
// random_assign borrow their cluster count per region from the Ward cut under
// the same height rule, so all three partition at comparable granularity.
struct MethodSpec {
  enum class Estimator { ac, ca, cla };
  enum class ClusterAlgo { ward, kmeans, random_assign };
  Estimator estimator = Estimator::cla;
  ClusterAlgo algo = ClusterAlgo::ward;

  static MethodSpec parse(const std::string& label);  // "ac" | "ca" | "cla:<algo>"
  std::string label() const;
};

struct BenchmarkResult {
  std::string method;  // estimator label, plus height-rule suffix for cla
  std::vector<double> squared_errors;  // one per replicate
  double mse = 0.0;
  double sd = 0.0;  // sample sd of the squared errors
};

// Monte-Carlo comparison: for every replicate draws one sample of the
// scenario, applies each method under each height rule, and records the
// squared error of the regional point estimate.  ac/ca ignore height rules
// and appear once.  Deterministic given spec.seed for any thread count.
std::vector<BenchmarkResult> run_benchmark(const ScenarioSpec& spec,
                                           std::span<const MethodSpec> methods,
                                           std::span<const HeightRule> rules,
                                           int threads = 1);

// Cluster-level error as a function of the two cut-off heights, on a uniform
// grid over [0, root height] per region, with the h_max point and the grid
// argmin annotated.
struct ErrorSurface {
  std::vector<double> heights_a;
  std::vector<double> heights_b;
  Eigen::MatrixXd error;  // heights_a.size() x heights_b.size()
  struct Marker {
    double h_a = 0.0;
    double h_b = 0.0;
    double error = 0.0;
  };
  Marker at_h_max;
  Marker at_argmin;  // first grid minimum in row-major order
};

ErrorSurface error_surface(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b,
                           double rho_true, int grid_a = 25, int grid_b = 25);

// Lin's concordance correlation coefficient with 1/n sample moments:
//   2 cov(x,y) / (var(x) + var(y) + (mean x - mean y)^2).
double concordance_ccc(std::span<const double> x, std::span<const double> y);

}  // namespace clacorr
