#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "clacorr/estimators.hpp"
#include "clacorr/types.hpp"

namespace clacorr {

enum class ScenarioModel { toeplitz1d, matern3d, spherical3d };

const char* to_string(ScenarioModel m);
ScenarioModel scenario_model_from(const std::string& name);  // ConfigError

// Per-voxel positions on an integer lattice (1D models use (i, 0, 0)).
struct VoxelGeometry {
  std::vector<std::array<double, 3>> coordinates;
};

// Complete description of a two-region synthetic experiment.
struct ScenarioSpec {
  ScenarioModel model = ScenarioModel::toeplitz1d;
  int n_voxels_a = 60;
  int n_voxels_b = 60;
  int n_time = 800;
  int replicates = 50;
  double eta_minus_a = 0.2;  // Toeplitz floor
  double eta_minus_b = 0.2;
  double range_a = 0.6;  // Matern / spherical range
  double range_b = 0.6;
  double kappa = 70.0;  // Matern smoothness
  double sigma2_a = 1.0;
  double sigma2_b = 1.0;
  double gamma2_a = 0.5;
  double gamma2_b = 0.5;
  double rho = 0.3;
  std::uint64_t seed = 0;
  std::optional<VoxelGeometry> geometry_a;  // overrides default_geometry
  std::optional<VoxelGeometry> geometry_b;
};

void validate(const ScenarioSpec& spec);  // DomainError on bad parameters

// Intra-correlation kernels.  All return 1 at distance 0 and are
// non-increasing in distance.
double toeplitz_correlation(double lag, double eta_minus);  // max(1 - lag/30, eta_minus)
double matern_correlation(double distance, double range, double smoothness);
double spherical_correlation(double distance, double range);

// Default voxel layout: 1D models use indices 0..N-1; 3D models use the most
// compact integer lattice block a x b x c = N with a >= b >= c and bounded
// anisotropy a <= 3c (N = 60 gives 5 x 4 x 3).  GeometryError when no such
// factorization exists — supply explicit coordinates instead.
VoxelGeometry default_geometry(ScenarioModel model, int n);

// Assembled latent covariance with its ground truth and a reusable
// factorization.  Regions are labeled "A" and "B"; rows 0..N_A-1 belong to A.
struct CovarianceModel {
  Eigen::MatrixXd latent_covariance;  // (N_A+N_B) square, noise-free
  GroundTruthParams truth;
  Eigen::MatrixXd factor;  // lower-triangular, factor * factor^T ~= covariance
  int n_a = 0;
  int n_b = 0;
};

// Builds diagonal blocks sigma^2 * eta from the chosen kernel and a constant
// rho*sigma_a*sigma_b off-diagonal block, then validates positive
// semi-definiteness by attempted Cholesky factorization with diagonal jitter
// escalating to 1e-10; beyond that throws NotPsdError carrying the most
// negative eigenvalue.
CovarianceModel build_covariance(const ScenarioSpec& spec);

// Draws n i.i.d. latent samples through the factorization, then adds
// spatially and temporally white Gaussian noise of variance gamma^2 per
// region.  Deterministic given (spec.seed, replicate_index); the convenience
// overload rebuilds the covariance each call.
std::pair<TimeSeriesMatrix, TimeSeriesMatrix> sample_scenario(
    const ScenarioSpec& spec, const CovarianceModel& model, int replicate_index);
std::pair<TimeSeriesMatrix, TimeSeriesMatrix> sample_scenario(
    const ScenarioSpec& spec, int replicate_index);

}  // namespace clacorr
