#include "clacorr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "clacorr/errors.hpp"

namespace clacorr {

namespace {

// A centered series counts as constant when its centered norm falls below
// this fraction of the raw vector norm.
constexpr double kZeroVarianceTol = 1e-14;

}  // namespace

void clamp_correlations(Eigen::MatrixXd& m, const std::string& context) {
  const double excess =
      std::max(0.0, std::max(m.maxCoeff() - 1.0, -1.0 - m.minCoeff()));
  if (excess > 1e-12)
    std::cerr << "warning: " << context << ": correlation exceeds [-1, 1] by "
              << excess << ", clamped\n";
  m = m.cwiseMax(-1.0).cwiseMin(1.0);
}

double sample_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ShapeError("sample_correlation: length mismatch " +
                     std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (x.size() < 2)
    throw ShapeError("sample_correlation: need at least 2 points, got " +
                     std::to_string(x.size()));
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    mx += x[t];
    my += y[t];
    nx += x[t] * x[t];
    ny += y[t] * y[t];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dx = x[t] - mx;
    const double dy = y[t] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double tol2 = kZeroVarianceTol * kZeroVarianceTol;
  if (!(sxx > tol2 * nx))
    throw ZeroVarianceError("first argument of sample_correlation");
  if (!(syy > tol2 * ny))
    throw ZeroVarianceError("second argument of sample_correlation");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Eigen::MatrixXd centered_unit_rows(const Eigen::MatrixXd& values,
                                   const std::vector<std::string>& row_ids,
                                   const std::string& who) {
  Eigen::MatrixXd c = values;
  c.colwise() -= values.rowwise().mean();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const double norm = c.row(i).norm();
    if (!(norm > kZeroVarianceTol * values.row(i).norm())) {
      const std::string label = static_cast<std::size_t>(i) < row_ids.size()
                                    ? row_ids[i]
                                    : std::to_string(i);
      throw ZeroVarianceError(who + ":" + label);
    }
    c.row(i) /= norm;
  }
  return c;
}

CorrelationMatrix pairwise_correlations(const TimeSeriesMatrix& a,
                                        const TimeSeriesMatrix& b) {
  if (a.time_count() != b.time_count())
    throw ShapeError("pairwise_correlations: time axes differ, " +
                     std::to_string(a.time_count()) + " vs " +
                     std::to_string(b.time_count()));
  const Eigen::MatrixXd ua = centered_unit_rows(a.values, a.voxel_ids, a.region_id);
  const Eigen::MatrixXd ub = centered_unit_rows(b.values, b.voxel_ids, b.region_id);
  CorrelationMatrix out{a.voxel_ids, b.voxel_ids, ua * ub.transpose()};
  clamp_correlations(out.entries, "pairwise_correlations(" + a.region_id + "," +
                                      b.region_id + ")");
  return out;
}

CorrelationMatrix pairwise_correlations(const TimeSeriesMatrix& a) {
  const Eigen::MatrixXd ua = centered_unit_rows(a.values, a.voxel_ids, a.region_id);
  Eigen::MatrixXd r = ua * ua.transpose();
  // enforce exact symmetry and unit diagonal (GEMM rounding breaks both)
  r = ((r + r.transpose()) * 0.5).eval();
  r.diagonal().setOnes();
  CorrelationMatrix out{a.voxel_ids, a.voxel_ids, std::move(r)};
  clamp_correlations(out.entries, "pairwise_correlations(" + a.region_id + ")");
  return out;
}

UScoreMatrix u_scores(const TimeSeriesMatrix& a) {
  const Eigen::Index n = a.time_count();
  const Eigen::MatrixXd c = centered_unit_rows(a.values, a.voxel_ids, a.region_id);
  Eigen::MatrixXd scores(c.rows(), n - 1);
  // Helmert basis of the hyperplane orthogonal to 1: coordinate k-1 of row z
  // is (z_0 + ... + z_{k-1} - k z_k) / sqrt(k(k+1)).  One O(n) pass per row;
  // the basis is orthonormal, so row inner products are preserved.
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    double prefix = 0.0;
    for (Eigen::Index k = 1; k < n; ++k) {
      prefix += c(i, k - 1);
      const double kk = static_cast<double>(k);
      scores(i, k - 1) = (prefix - kk * c(i, k)) / std::sqrt(kk * (kk + 1.0));
    }
  }
  return UScoreMatrix{a.voxel_ids, std::move(scores)};
}

double correlation_to_distance(double r) {
  if (std::isnan(r) || r < -1.0 - 1e-12 || r > 1.0 + 1e-12)
    throw DomainError("correlation_to_distance: r = " + std::to_string(r) +
                      " outside [-1, 1]");
  return std::sqrt(2.0 * (1.0 - std::clamp(r, -1.0, 1.0)));
}

}  // namespace clacorr
