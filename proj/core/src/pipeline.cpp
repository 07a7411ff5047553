#include "clacorr/pipeline.hpp"

#include <algorithm>
#include <utility>

#include "clacorr/errors.hpp"
#include "clacorr/estimators.hpp"
#include "clacorr/parallel.hpp"
#include "clacorr/stats.hpp"

namespace clacorr {

namespace {

struct RegionWork {
  const TimeSeriesMatrix* series = nullptr;
  Clustering clustering;
  HeightRecord record;
};

RegionWork cluster_region(const TimeSeriesMatrix& ts, const HeightRule& rule) {
  RegionWork work;
  work.series = &ts;

  const CorrelationMatrix corr = pairwise_correlations(ts);
  const Dendrogram dend = ward_dendrogram(corr, ts.region_id);
  const double hmax = h_max(corr);

  double used = 0.0;
  switch (rule.kind) {
    case HeightRule::Kind::maxu:
      used = hmax;
      work.clustering = cut_dendrogram(dend, used);
      break;
    case HeightRule::Kind::silhouette: {
      HeightSelection sel = select_height_silhouette(dend, corr);
      used = sel.height;
      work.clustering = std::move(sel.clustering);
      break;
    }
    case HeightRule::Kind::fixed:
      used = rule.fixed_height;
      work.clustering = cut_dendrogram(dend, used);
      break;
  }

  work.record = HeightRecord{ts.region_id, used, hmax,
                             work.clustering.n_clusters};
  return work;
}

}  // namespace

PipelineResult run_pipeline(std::span<const TimeSeriesMatrix> regions,
                            const PipelineOptions& opt) {
  if (regions.empty()) {
    throw ConsistencyError("pipeline: no regions supplied");
  }
  const Eigen::Index n = regions.front().time_count();
  for (const auto& ts : regions) {
    validate(ts);
    if (ts.time_count() != n) {
      throw ShapeError("pipeline: region '" + ts.region_id + "' has " +
                       std::to_string(ts.time_count()) +
                       " time points, expected " + std::to_string(n));
    }
  }

  // Process regions in sorted-id order so outputs are stable regardless of
  // input order.
  std::vector<const TimeSeriesMatrix*> ordered;
  ordered.reserve(regions.size());
  for (const auto& ts : regions) ordered.push_back(&ts);
  std::sort(ordered.begin(), ordered.end(),
            [](const TimeSeriesMatrix* a, const TimeSeriesMatrix* b) {
              return a->region_id < b->region_id;
            });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->region_id == ordered[i - 1]->region_id) {
      throw ConsistencyError("pipeline: duplicate region id '" +
                             ordered[i]->region_id + "'");
    }
  }

  PipelineResult result;

  // Clustering always runs: it is what produces heights.csv, even when only
  // AC/CA estimates were requested.
  std::vector<RegionWork> work(ordered.size());
  parallel_for(ordered.size(), opt.threads, [&](std::size_t i) {
    work[i] = cluster_region(*ordered[i], opt.height);
  });

  result.clusterings.reserve(work.size());
  result.heights.reserve(work.size());
  for (auto& w : work) {
    result.clusterings.push_back(w.clustering);
    result.heights.push_back(w.record);
  }

  // All pairs i < j in sorted order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    for (std::size_t j = i + 1; j < ordered.size(); ++j) {
      pairs.emplace_back(i, j);
    }
  }

  struct PairOut {
    std::vector<EstimateRecord> rows;
    EstimateSet set;
    bool has_set = false;
  };
  std::vector<PairOut> outs(pairs.size());

  parallel_for(pairs.size(), opt.threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    const TimeSeriesMatrix& a = *ordered[i];
    const TimeSeriesMatrix& b = *ordered[j];
    PairOut& out = outs[p];
    if (opt.want_ac) {
      out.rows.push_back(
          {a.region_id, b.region_id, "ac", estimate_ac(a, b)});
    }
    if (opt.want_ca) {
      out.rows.push_back(
          {a.region_id, b.region_id, "ca", estimate_ca(a, b)});
    }
    if (opt.want_cla) {
      out.set = estimate_cla(a, b, work[i].clustering, work[j].clustering);
      out.has_set = true;
      out.rows.push_back(
          {a.region_id, b.region_id, "cla", out.set.cla_point});
    }
  });

  for (auto& out : outs) {
    for (auto& row : out.rows) result.estimates.push_back(std::move(row));
    if (out.has_set) result.distributions.push_back(std::move(out.set));
  }
  return result;
}

void write_pipeline_outputs(const std::filesystem::path& out_dir,
                            const PipelineResult& result,
                            const PipelineOptions& opt) {
  std::filesystem::create_directories(out_dir);
  save_clusters(out_dir / "clusters.csv", result.clusterings);
  save_heights(out_dir / "heights.csv", result.heights);
  save_estimates(out_dir / "estimates.csv", result.estimates);
  if (opt.want_cla) {
    save_cla_distribution(out_dir / "cla_distribution.csv",
                          result.distributions);
  }
}

}  // namespace clacorr
