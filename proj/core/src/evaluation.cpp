#include "clacorr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "clacorr/errors.hpp"
#include "clacorr/parallel.hpp"
#include "clacorr/rng.hpp"
#include "clacorr/stats.hpp"

namespace clacorr {

double cluster_level_error(const EstimateSet& est, double rho_true) {
  if (est.cluster_pair_estimates.empty())
    throw DomainError("cluster_level_error: empty estimate set");
  double sum = 0.0;
  for (const auto& cp : est.cluster_pair_estimates) {
    const double d = cp.r - rho_true;
    sum += d * d;
  }
  return sum / static_cast<double>(est.cluster_pair_estimates.size());
}

MethodSpec MethodSpec::parse(const std::string& label) {
  if (label == "ac") return {Estimator::ac, ClusterAlgo::ward};
  if (label == "ca") return {Estimator::ca, ClusterAlgo::ward};
  if (label == "cla" || label == "cla:ward")
    return {Estimator::cla, ClusterAlgo::ward};
  if (label == "cla:kmeans") return {Estimator::cla, ClusterAlgo::kmeans};
  if (label == "cla:random") return {Estimator::cla, ClusterAlgo::random_assign};
  throw ConfigError("unknown method '" + label +
                    "' (expected ac, ca, cla:ward, cla:kmeans, or cla:random)");
}

std::string MethodSpec::label() const {
  switch (estimator) {
    case Estimator::ac:
      return "ac";
    case Estimator::ca:
      return "ca";
    case Estimator::cla:
      switch (algo) {
        case ClusterAlgo::ward:
          return "cla:ward";
        case ClusterAlgo::kmeans:
          return "cla:kmeans";
        case ClusterAlgo::random_assign:
          return "cla:random";
      }
  }
  return "?";
}

namespace {

// per-replicate shared intermediates, computed at most once each
struct ReplicateState {
  ReplicateState(const TimeSeriesMatrix& a_in, const TimeSeriesMatrix& b_in)
      : a(a_in), b(b_in) {}

  const TimeSeriesMatrix& a;
  const TimeSeriesMatrix& b;
  std::optional<CorrelationMatrix> corr_a, corr_b;
  std::optional<Dendrogram> dend_a, dend_b;
  std::optional<UScoreMatrix> u_a, u_b;
  std::vector<std::pair<std::string, std::pair<Clustering, Clustering>>> cuts;

  const CorrelationMatrix& corr(bool second) {
    auto& slot = second ? corr_b : corr_a;
    if (!slot) slot = pairwise_correlations(second ? b : a);
    return *slot;
  }
  const Dendrogram& dend(bool second) {
    auto& slot = second ? dend_b : dend_a;
    if (!slot)
      slot = ward_dendrogram(corr(second), (second ? b : a).region_id);
    return *slot;
  }
  const UScoreMatrix& uscores(bool second) {
    auto& slot = second ? u_b : u_a;
    if (!slot) slot = u_scores(second ? b : a);
    return *slot;
  }
  const std::pair<Clustering, Clustering>& ward_cut(const HeightRule& rule) {
    const std::string key = rule.label();
    for (const auto& entry : cuts)
      if (entry.first == key) return entry.second;
    cuts.push_back({key,
                    {apply_height_rule(dend(false), corr(false), rule),
                     apply_height_rule(dend(true), corr(true), rule)}});
    return cuts.back().second;
  }
};

}  // namespace

std::vector<BenchmarkResult> run_benchmark(const ScenarioSpec& spec,
                                           std::span<const MethodSpec> methods,
                                           std::span<const HeightRule> rules,
                                           int threads) {
  if (methods.empty()) throw DomainError("run_benchmark: no methods");
  std::vector<HeightRule> default_rules{HeightRule{}};
  if (rules.empty()) rules = default_rules;

  struct Desc {
    MethodSpec method;
    HeightRule rule;
    std::string label;
  };
  std::vector<Desc> descs;
  for (const auto& m : methods) {
    if (m.estimator != MethodSpec::Estimator::cla) {
      const std::string label = m.label();
      if (std::none_of(descs.begin(), descs.end(),
                       [&](const Desc& d) { return d.label == label; }))
        descs.push_back({m, {}, label});
    } else {
      for (const auto& rule : rules) {
        const std::string label = m.label() + ":" + rule.label();
        if (std::none_of(descs.begin(), descs.end(),
                         [&](const Desc& d) { return d.label == label; }))
          descs.push_back({m, rule, label});
      }
    }
  }

  const CovarianceModel model = build_covariance(spec);
  const int reps = spec.replicates;
  std::vector<std::vector<double>> se(descs.size());
  for (auto& v : se) v.resize(reps);

  parallel_for(reps, threads, [&](std::size_t r) {
    const auto [a, b] = sample_scenario(spec, model, static_cast<int>(r));
    ReplicateState state{a, b};
    for (std::size_t d = 0; d < descs.size(); ++d) {
      const auto& desc = descs[d];
      double value = 0.0;
      switch (desc.method.estimator) {
        case MethodSpec::Estimator::ac:
          value = estimate_ac(a, b);
          break;
        case MethodSpec::Estimator::ca:
          value = estimate_ca(a, b);
          break;
        case MethodSpec::Estimator::cla: {
          const auto& ward = state.ward_cut(desc.rule);
          Clustering pa, pb;
          switch (desc.method.algo) {
            case MethodSpec::ClusterAlgo::ward:
              pa = ward.first;
              pb = ward.second;
              break;
            case MethodSpec::ClusterAlgo::kmeans:
              // same cluster count as the Ward cut, so granularity matches
              pa = kmeans_clusters(state.uscores(false), ward.first.n_clusters,
                                   rng::mix(spec.seed, {r, 0}), a.region_id);
              pb = kmeans_clusters(state.uscores(true), ward.second.n_clusters,
                                   rng::mix(spec.seed, {r, 1}), b.region_id);
              break;
            case MethodSpec::ClusterAlgo::random_assign:
              pa = random_clusters(a.voxel_ids, ward.first.n_clusters,
                                   rng::mix(spec.seed, {r, 0}), a.region_id);
              pb = random_clusters(b.voxel_ids, ward.second.n_clusters,
                                   rng::mix(spec.seed, {r, 1}), b.region_id);
              break;
          }
          value = cluster_pair_correlations(a, b, pa, pb).entries.mean();
          break;
        }
      }
      const double err = value - spec.rho;
      se[d][r] = err * err;
    }
  });

  std::vector<BenchmarkResult> out;
  out.reserve(descs.size());
  for (std::size_t d = 0; d < descs.size(); ++d) {
    BenchmarkResult res;
    res.method = descs[d].label;
    res.squared_errors = std::move(se[d]);
    double mean = 0.0;
    for (double v : res.squared_errors) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : res.squared_errors) var += (v - mean) * (v - mean);
    res.mse = mean;
    res.sd = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
    out.push_back(std::move(res));
  }
  return out;
}

ErrorSurface error_surface(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b,
                           double rho_true, int grid_a, int grid_b) {
  if (grid_a < 1 || grid_b < 1)
    throw DomainError("error_surface: grid must be nonempty");
  const CorrelationMatrix corr_a = pairwise_correlations(a);
  const CorrelationMatrix corr_b = pairwise_correlations(b);
  const Dendrogram dend_a = ward_dendrogram(corr_a, a.region_id);
  const Dendrogram dend_b = ward_dendrogram(corr_b, b.region_id);

  auto linspace = [](double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
      out[i] = count > 1 ? hi * i / (count - 1) : 0.0;
    // Pin the endpoints: the last height must equal the root height exactly,
    // or rounding could leave the final merge outside the inclusive cut.
    out.front() = 0.0;
    out.back() = count > 1 ? hi : 0.0;
    return out;
  };
  ErrorSurface surf;
  surf.heights_a = linspace(dend_a.root_height(), grid_a);
  surf.heights_b = linspace(dend_b.root_height(), grid_b);

  std::vector<Clustering> cuts_a, cuts_b;
  cuts_a.reserve(grid_a);
  cuts_b.reserve(grid_b);
  for (double h : surf.heights_a) cuts_a.push_back(cut_dendrogram(dend_a, h));
  for (double h : surf.heights_b) cuts_b.push_back(cut_dendrogram(dend_b, h));

  auto cell = [&](const Clustering& pa, const Clustering& pb) {
    const Eigen::MatrixXd r = cluster_pair_correlations(a, b, pa, pb).entries;
    return (r.array() - rho_true).square().mean();
  };

  surf.error.resize(grid_a, grid_b);
  for (int i = 0; i < grid_a; ++i)
    for (int j = 0; j < grid_b; ++j) surf.error(i, j) = cell(cuts_a[i], cuts_b[j]);

  const double ha = h_max(corr_a);
  const double hb = h_max(corr_b);
  surf.at_h_max = {ha, hb,
                   cell(cut_dendrogram(dend_a, ha), cut_dendrogram(dend_b, hb))};

  int bi = 0, bj = 0;
  for (int i = 0; i < grid_a; ++i)
    for (int j = 0; j < grid_b; ++j)
      if (surf.error(i, j) < surf.error(bi, bj)) {
        bi = i;
        bj = j;
      }
  surf.at_argmin = {surf.heights_a[bi], surf.heights_b[bj], surf.error(bi, bj)};
  return surf;
}

double concordance_ccc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ShapeError("concordance_ccc: length mismatch " +
                     std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (x.size() < 2)
    throw ShapeError("concordance_ccc: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  mx /= n;
  my /= n;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  const double tol2 = 1e-28;
  if (!(vx > tol2 * nx)) throw ZeroVarianceError("first argument of concordance_ccc");
  if (!(vy > tol2 * ny)) throw ZeroVarianceError("second argument of concordance_ccc");
  const double shift = mx - my;
  return std::clamp(2.0 * cov / (vx + vy + n * shift * shift), -1.0, 1.0);
}

}  // namespace clacorr
