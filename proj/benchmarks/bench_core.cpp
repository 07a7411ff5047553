// Microbenchmarks for the hot paths: correlation matrices, U-scores, Ward
// linkage, and the full per-pair estimate.  Run with --benchmark_filter=...
// to narrow.

#include <benchmark/benchmark.h>

#include <map>
#include <utility>

#include "clacorr/clustering.hpp"
#include "clacorr/estimators.hpp"
#include "clacorr/evaluation.hpp"
#include "clacorr/stats.hpp"
#include "clacorr/synthetic.hpp"

namespace {

using clacorr::TimeSeriesMatrix;

clacorr::ScenarioSpec spec_for(int n_voxels, int n_time) {
  clacorr::ScenarioSpec spec;
  spec.n_voxels_a = n_voxels;
  spec.n_voxels_b = n_voxels;
  spec.n_time = n_time;
  spec.replicates = 1;
  spec.seed = 20240814;
  return spec;
}

const std::pair<TimeSeriesMatrix, TimeSeriesMatrix>& sample_for(int n_voxels,
                                                                int n_time) {
  static std::map<std::pair<int, int>,
                  std::pair<TimeSeriesMatrix, TimeSeriesMatrix>>
      cache;
  auto key = std::make_pair(n_voxels, n_time);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, clacorr::sample_scenario(spec_for(n_voxels, n_time), 0))
             .first;
  }
  return it->second;
}

void BM_PairwiseCorrelations(benchmark::State& state) {
  const auto& ts = sample_for(static_cast<int>(state.range(0)), 800).first;
  for (auto _ : state) {
    clacorr::CorrelationMatrix corr = clacorr::pairwise_correlations(ts);
    benchmark::DoNotOptimize(corr.entries.data());
  }
}
BENCHMARK(BM_PairwiseCorrelations)->Arg(30)->Arg(60)->Arg(120);

void BM_UScores(benchmark::State& state) {
  const auto& ts = sample_for(60, static_cast<int>(state.range(0))).first;
  for (auto _ : state) {
    clacorr::UScoreMatrix u = clacorr::u_scores(ts);
    benchmark::DoNotOptimize(u.scores.data());
  }
}
BENCHMARK(BM_UScores)->Arg(200)->Arg(800)->Arg(3200);

void BM_WardDendrogram(benchmark::State& state) {
  const int n_voxels = static_cast<int>(state.range(0));
  const auto corr =
      clacorr::pairwise_correlations(sample_for(n_voxels, 800).first);
  for (auto _ : state) {
    clacorr::Dendrogram d = clacorr::ward_dendrogram(corr);
    benchmark::DoNotOptimize(d.merges.data());
  }
}
BENCHMARK(BM_WardDendrogram)->Arg(30)->Arg(60)->Arg(120)->Arg(240);

void BM_SilhouetteSelection(benchmark::State& state) {
  const auto corr = clacorr::pairwise_correlations(sample_for(60, 800).first);
  const auto dend = clacorr::ward_dendrogram(corr);
  for (auto _ : state) {
    clacorr::HeightSelection sel = clacorr::select_height_silhouette(dend, corr);
    benchmark::DoNotOptimize(sel.height);
  }
}
BENCHMARK(BM_SilhouetteSelection);

void BM_EstimateCla(benchmark::State& state) {
  const auto& [a, b] = sample_for(60, 800);
  const auto corr_a = clacorr::pairwise_correlations(a);
  const auto corr_b = clacorr::pairwise_correlations(b);
  const auto cut_a = clacorr::cut_dendrogram(clacorr::ward_dendrogram(corr_a),
                                             clacorr::h_max(corr_a));
  const auto cut_b = clacorr::cut_dendrogram(clacorr::ward_dendrogram(corr_b),
                                             clacorr::h_max(corr_b));
  for (auto _ : state) {
    clacorr::EstimateSet est = clacorr::estimate_cla(a, b, cut_a, cut_b);
    benchmark::DoNotOptimize(est.cla_point);
  }
}
BENCHMARK(BM_EstimateCla);

void BM_SampleScenario(benchmark::State& state) {
  const clacorr::ScenarioSpec spec = spec_for(60, 800);
  const clacorr::CovarianceModel model = clacorr::build_covariance(spec);
  for (auto _ : state) {
    auto sample = clacorr::sample_scenario(spec, model, 0);
    benchmark::DoNotOptimize(sample.first.values.data());
  }
}
BENCHMARK(BM_SampleScenario);

}  // namespace

BENCHMARK_MAIN();
