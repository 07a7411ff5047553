#pragma once

#include <span>

#include "clacorr/types.hpp"

namespace clacorr {

// Pearson sample correlation with 1/n moment normalization (the constant
// cancels, so the value matches any consistent convention).  Throws
// ShapeError on length mismatch or length < 3, ZeroVarianceError when either
// series is constant.
double sample_correlation(std::span<const double> x, std::span<const double> y);

// Rows centered and scaled to unit Euclidean norm, so that row inner products
// are sample correlations.  `who` labels rows in ZeroVarianceError messages.
Eigen::MatrixXd centered_unit_rows(const Eigen::MatrixXd& values,
                                   const std::vector<std::string>& row_ids,
                                   const std::string& who);

// All voxel-pair correlations between two regions (rows: a, cols: b).
// Both matrices must share the time axis length.
CorrelationMatrix pairwise_correlations(const TimeSeriesMatrix& a,
                                        const TimeSeriesMatrix& b);

// Intra-regional variant: square, exactly symmetric, unit diagonal.
CorrelationMatrix pairwise_correlations(const TimeSeriesMatrix& a);

// U-scores: an isometric embedding of the centered, unit-scaled series into
// R^(n-1) computed with an orthonormal basis of the centering hyperplane.
// Inner products of rows equal sample correlations; squared distances are
// 2(1 - r).
UScoreMatrix u_scores(const TimeSeriesMatrix& a);

// d = sqrt(2(1 - r)); r is clamped into [-1, 1] first so rounding noise
// cannot produce NaN.
double correlation_to_distance(double r);

// Clamps correlation entries into [-1, 1].  Excess at rounding scale
// (<= 1e-12) is silent; anything larger logs a warning to stderr naming the
// context, since it signals a bug rather than arithmetic noise.
void clamp_correlations(Eigen::MatrixXd& m, const std::string& context);

}  // namespace clacorr
