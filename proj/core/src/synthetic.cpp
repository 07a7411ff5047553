#include "clacorr/synthetic.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_gamma.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>

#include "clacorr/errors.hpp"
#include "clacorr/rng.hpp"

namespace clacorr {

const char* to_string(ScenarioModel m) {
  switch (m) {
    case ScenarioModel::toeplitz1d:
      return "toeplitz1d";
    case ScenarioModel::matern3d:
      return "matern3d";
    case ScenarioModel::spherical3d:
      return "spherical3d";
  }
  return "?";
}

ScenarioModel scenario_model_from(const std::string& name) {
  if (name == "toeplitz1d") return ScenarioModel::toeplitz1d;
  if (name == "matern3d") return ScenarioModel::matern3d;
  if (name == "spherical3d") return ScenarioModel::spherical3d;
  throw ConfigError("unknown scenario model '" + name +
                    "' (expected toeplitz1d, matern3d, or spherical3d)");
}

void validate(const ScenarioSpec& spec) {
  if (spec.n_voxels_a < 1 || spec.n_voxels_b < 1)
    throw DomainError("scenario: region sizes must be >= 1");
  if (spec.n_time < 3) throw DomainError("scenario: need n_time >= 3");
  if (spec.replicates < 1) throw DomainError("scenario: need replicates >= 1");
  if (spec.sigma2_a < 0 || spec.sigma2_b < 0 || spec.gamma2_a < 0 ||
      spec.gamma2_b < 0)
    throw DomainError("scenario: variances must be >= 0");
  if (std::abs(spec.rho) > 1.0)
    throw DomainError("scenario: rho must lie in [-1, 1]");
  if (spec.model == ScenarioModel::toeplitz1d) {
    if (spec.eta_minus_a < 0 || spec.eta_minus_a > 1 || spec.eta_minus_b < 0 ||
        spec.eta_minus_b > 1)
      throw DomainError("scenario: eta_minus must lie in [0, 1]");
  } else {
    if (spec.range_a <= 0 || spec.range_b <= 0)
      throw DomainError("scenario: range must be > 0");
    if (spec.model == ScenarioModel::matern3d && spec.kappa <= 0)
      throw DomainError("scenario: kappa must be > 0");
  }
  for (const auto* g : {&spec.geometry_a, &spec.geometry_b}) {
    if (!g->has_value()) continue;
    const auto& coords = (*g)->coordinates;
    std::set<std::array<double, 3>> distinct(coords.begin(), coords.end());
    if (distinct.size() != coords.size())
      throw GeometryError("scenario: duplicate voxel coordinates in override");
  }
  if (spec.geometry_a &&
      static_cast<int>(spec.geometry_a->coordinates.size()) != spec.n_voxels_a)
    throw GeometryError("scenario: geometry_a has " +
                        std::to_string(spec.geometry_a->coordinates.size()) +
                        " coordinates for " + std::to_string(spec.n_voxels_a) +
                        " voxels");
  if (spec.geometry_b &&
      static_cast<int>(spec.geometry_b->coordinates.size()) != spec.n_voxels_b)
    throw GeometryError("scenario: geometry_b has " +
                        std::to_string(spec.geometry_b->coordinates.size()) +
                        " coordinates for " + std::to_string(spec.n_voxels_b) +
                        " voxels");
}

double toeplitz_correlation(double lag, double eta_minus) {
  if (lag < 0 || eta_minus < 0 || eta_minus > 1)
    throw DomainError("toeplitz_correlation: need lag >= 0 and eta_minus in [0,1]");
  return std::max(1.0 - lag / 30.0, eta_minus);
}

double matern_correlation(double distance, double range, double smoothness) {
  // GSL must report failures through status codes, not its aborting handler
  [[maybe_unused]] static const int gsl_quiet = [] {
    gsl_set_error_handler_off();
    return 0;
  }();
  if (distance < 0 || range <= 0 || smoothness <= 0)
    throw DomainError(
        "matern_correlation: need distance >= 0, range > 0, smoothness > 0");
  const double x = distance / range;
  if (x < 1e-12) return 1.0;
  // 2^(1-k)/Gamma(k) x^k K_k(x), evaluated in log space: at smoothness ~70
  // both factors overflow/underflow individually long before their product
  // leaves (0, 1].
  gsl_sf_result lnk;
  const int status = gsl_sf_bessel_lnKnu_e(smoothness, x, &lnk);
  if (status == GSL_EUNDRFLW) return 0.0;
  if (status != GSL_SUCCESS)
    throw DomainError("matern_correlation: Bessel evaluation failed for x = " +
                      std::to_string(x));
  const double log_val = (1.0 - smoothness) * std::log(2.0) -
                         gsl_sf_lngamma(smoothness) +
                         smoothness * std::log(x) + lnk.val;
  return std::min(std::exp(log_val), 1.0);
}

double spherical_correlation(double distance, double range) {
  if (distance < 0 || range <= 0)
    throw DomainError("spherical_correlation: need distance >= 0 and range > 0");
  if (distance >= range) return 0.0;
  const double t = distance / range;
  return 1.0 - 1.5 * t + 0.5 * t * t * t;
}

VoxelGeometry default_geometry(ScenarioModel model, int n) {
  if (n < 1) throw DomainError("default_geometry: need n >= 1");
  VoxelGeometry g;
  g.coordinates.reserve(n);
  if (model == ScenarioModel::toeplitz1d) {
    for (int i = 0; i < n; ++i)
      g.coordinates.push_back({static_cast<double>(i), 0.0, 0.0});
    return g;
  }
  // most compact a x b x c = n with a >= b >= c, minimizing (a, b); reject
  // blocks stretched beyond 3:1, which only admit degenerate line layouts
  int best_a = -1, best_b = -1, best_c = -1;
  for (int c = 1; c * c * c <= n; ++c) {
    if (n % c != 0) continue;
    const int rest = n / c;
    for (int b = c; b * b <= rest; ++b) {
      if (rest % b != 0) continue;
      const int a = rest / b;
      if (a < b || a > 3 * c) continue;
      if (best_a < 0 || a < best_a || (a == best_a && b < best_b)) {
        best_a = a;
        best_b = b;
        best_c = c;
      }
    }
  }
  if (best_a < 0)
    throw GeometryError("default_geometry: " + std::to_string(n) +
                        " voxels do not form a lattice block with anisotropy "
                        "<= 3:1; supply explicit coordinates");
  for (int x = 0; x < best_a; ++x)
    for (int y = 0; y < best_b; ++y)
      for (int z = 0; z < best_c; ++z)
        g.coordinates.push_back({static_cast<double>(x), static_cast<double>(y),
                                 static_cast<double>(z)});
  return g;
}

namespace {

double distance(const std::array<double, 3>& p, const std::array<double, 3>& q) {
  const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Eigen::MatrixXd intra_matrix(const ScenarioSpec& spec, const VoxelGeometry& g,
                             double eta_minus, double range) {
  const int n = static_cast<int>(g.coordinates.size());
  Eigen::MatrixXd eta(n, n);
  for (int i = 0; i < n; ++i) {
    eta(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = distance(g.coordinates[i], g.coordinates[j]);
      double v = 0.0;
      switch (spec.model) {
        case ScenarioModel::toeplitz1d:
          v = toeplitz_correlation(d, eta_minus);
          break;
        case ScenarioModel::matern3d:
          v = matern_correlation(d, range, spec.kappa);
          break;
        case ScenarioModel::spherical3d:
          v = spherical_correlation(d, range);
          break;
      }
      eta(i, j) = eta(j, i) = v;
    }
  }
  return eta;
}

}  // namespace

CovarianceModel build_covariance(const ScenarioSpec& spec) {
  validate(spec);
  VoxelGeometry ga = spec.geometry_a
                         ? *spec.geometry_a
                         : default_geometry(spec.model, spec.n_voxels_a);
  VoxelGeometry gb = spec.geometry_b
                         ? *spec.geometry_b
                         : default_geometry(spec.model, spec.n_voxels_b);
  if (!spec.geometry_b) {
    // keep the default regions disjoint; intra-B distances are unaffected
    double max_x = 0.0;
    for (const auto& p : ga.coordinates) max_x = std::max(max_x, p[0]);
    for (auto& p : gb.coordinates) p[0] += max_x + 1.0;
  } else {
    // explicit coordinates are honored verbatim, so overlap is an error
    std::set<std::array<double, 3>> in_a(ga.coordinates.begin(),
                                         ga.coordinates.end());
    for (const auto& p : gb.coordinates)
      if (in_a.count(p))
        throw GeometryError("scenario: regions share a voxel coordinate");
  }

  CovarianceModel out;
  out.n_a = spec.n_voxels_a;
  out.n_b = spec.n_voxels_b;
  const Eigen::MatrixXd eta_a =
      intra_matrix(spec, ga, spec.eta_minus_a, spec.range_a);
  const Eigen::MatrixXd eta_b =
      intra_matrix(spec, gb, spec.eta_minus_b, spec.range_b);

  const int m = spec.n_voxels_a + spec.n_voxels_b;
  out.latent_covariance.resize(m, m);
  out.latent_covariance.topLeftCorner(out.n_a, out.n_a) = spec.sigma2_a * eta_a;
  out.latent_covariance.bottomRightCorner(out.n_b, out.n_b) =
      spec.sigma2_b * eta_b;
  const double cross = spec.rho * std::sqrt(spec.sigma2_a * spec.sigma2_b);
  out.latent_covariance.topRightCorner(out.n_a, out.n_b).setConstant(cross);
  out.latent_covariance.bottomLeftCorner(out.n_b, out.n_a).setConstant(cross);

  // PSD gate: Cholesky with escalating diagonal jitter; a matrix that still
  // fails at 1e-10 is treated as genuinely infeasible, not repaired
  bool ok = false;
  for (double jitter : {0.0, 1e-12, 1e-11, 1e-10}) {
    Eigen::MatrixXd trial = out.latent_covariance;
    trial.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      out.factor = llt.matrixL();
      ok = true;
      break;
    }
  }
  if (!ok) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        out.latent_covariance, Eigen::EigenvaluesOnly);
    throw NotPsdError(
        "scenario covariance is not positive semidefinite (model " +
            std::string(to_string(spec.model)) +
            "); intra- and inter-correlation levels are incompatible",
        es.eigenvalues().minCoeff());
  }

  out.truth.regions["A"] = {spec.sigma2_a, spec.gamma2_a, eta_a};
  out.truth.regions["B"] = {spec.sigma2_b, spec.gamma2_b, eta_b};
  out.truth.rho[{"A", "B"}] = spec.rho;
  return out;
}

namespace {

std::vector<std::string> voxel_names(const char* prefix, int n) {
  int width = 3;
  for (int v = 1000; n > v; v *= 10) ++width;
  std::vector<std::string> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::string digits = std::to_string(i);
    out.push_back(prefix + std::string(width - digits.size(), '0') + digits);
  }
  return out;
}

}  // namespace

std::pair<TimeSeriesMatrix, TimeSeriesMatrix> sample_scenario(
    const ScenarioSpec& spec, const CovarianceModel& model,
    int replicate_index) {
  if (replicate_index < 0 || replicate_index >= spec.replicates)
    throw DomainError("sample_scenario: replicate index " +
                      std::to_string(replicate_index) + " outside [0, " +
                      std::to_string(spec.replicates) + ")");
  const int m = model.n_a + model.n_b;
  const int n = spec.n_time;
  auto engine = rng::engine(spec.seed, rng::stream_sample,
                            static_cast<std::uint64_t>(replicate_index));
  std::normal_distribution<double> normal;

  // fixed draw order: all latent innovations column-major, then all noise
  Eigen::MatrixXd z(m, n);
  for (int t = 0; t < n; ++t)
    for (int v = 0; v < m; ++v) z(v, t) = normal(engine);
  Eigen::MatrixXd values = model.factor * z;
  const double sd_a = std::sqrt(spec.gamma2_a);
  const double sd_b = std::sqrt(spec.gamma2_b);
  for (int t = 0; t < n; ++t)
    for (int v = 0; v < m; ++v)
      values(v, t) += (v < model.n_a ? sd_a : sd_b) * normal(engine);

  TimeSeriesMatrix a{"A", voxel_names("A", model.n_a),
                     values.topRows(model.n_a)};
  TimeSeriesMatrix b{"B", voxel_names("B", model.n_b),
                     values.bottomRows(model.n_b)};
  return {std::move(a), std::move(b)};
}

std::pair<TimeSeriesMatrix, TimeSeriesMatrix> sample_scenario(
    const ScenarioSpec& spec, int replicate_index) {
  return sample_scenario(spec, build_covariance(spec), replicate_index);
}

}  // namespace clacorr
