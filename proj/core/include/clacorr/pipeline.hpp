#pragma once

#include <filesystem>
#include <span>

#include "clacorr/clustering.hpp"
#include "clacorr/io.hpp"
#include "clacorr/types.hpp"

namespace clacorr {

struct PipelineOptions {
  HeightRule height{};  // applied to every region
  bool want_ac = true;
  bool want_ca = true;
  bool want_cla = true;
  int threads = 1;
};

struct PipelineResult {
  std::vector<Clustering> clusterings;     // per region, sorted label order
  std::vector<HeightRecord> heights;       // same order
  std::vector<EstimateRecord> estimates;   // pairs in sorted order, ac/ca/cla
  std::vector<EstimateSet> distributions;  // one per pair when cla requested
};

// Clusters each region once under the height rule, then estimates every
// region pair.  Deterministic; thread count never changes the output.
PipelineResult run_pipeline(std::span<const TimeSeriesMatrix> regions,
                            const PipelineOptions& opt);

// Writes clusters.csv, heights.csv, estimates.csv, and (when cla was
// computed) cla_distribution.csv into out_dir.
void write_pipeline_outputs(const std::filesystem::path& out_dir,
                            const PipelineResult& result,
                            const PipelineOptions& opt);

}  // namespace clacorr
