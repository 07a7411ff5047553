#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "clacorr/evaluation.hpp"
#include "clacorr/synthetic.hpp"
#include "clacorr/types.hpp"

namespace clacorr {

// Fixed mapping from voxel ids to region labels.
struct Parcellation {
  std::vector<std::pair<std::string, std::string>> entries;  // file order
  std::map<std::string, std::string> region_of;

  std::vector<std::string> regions() const;  // sorted, unique
};

// All files are plain comma-separated text with a header row; fields must not
// contain commas.  Floats are written with 17 significant digits so values
// round-trip exactly.
std::string format_double(double v);

// parcellation.csv: voxel_id,region
Parcellation load_parcellation(const std::filesystem::path& path);
void save_parcellation(const std::filesystem::path& path, const Parcellation& p);

// timeseries csv: voxel_id,t0001,...  Rows are grouped into one
// TimeSeriesMatrix per region (regions in sorted label order, voxels in file
// order); every voxel must appear in the parcellation and vice versa.
std::vector<TimeSeriesMatrix> load_timeseries(const std::filesystem::path& path,
                                              const Parcellation& p);
void save_timeseries(const std::filesystem::path& path,
                     std::span<const TimeSeriesMatrix> regions);

// geometry csv: x,y,z (one row per voxel, in voxel order)
VoxelGeometry load_geometry(const std::filesystem::path& path);

struct HeightRecord {
  std::string region;
  double h_used = 0.0;
  double h_max = 0.0;
  int n_clusters = 0;
};
struct EstimateRecord {
  std::string region_a;
  std::string region_b;
  std::string estimator;  // "ac" | "ca" | "cla"
  double value = 0.0;
};

// clusters.csv: region,voxel_id,cluster_id
void save_clusters(const std::filesystem::path& path,
                   std::span<const Clustering> clusterings);
// heights.csv: region,h_used,h_max,n_clusters
void save_heights(const std::filesystem::path& path,
                  std::span<const HeightRecord> records);
// estimates.csv: region_a,region_b,estimator,value
void save_estimates(const std::filesystem::path& path,
                    std::span<const EstimateRecord> records);
std::vector<EstimateRecord> load_estimates(const std::filesystem::path& path);
// cla_distribution.csv: region_a,region_b,cluster_a,cluster_b,value
void save_cla_distribution(const std::filesystem::path& path,
                           std::span<const EstimateSet> sets);
// benchmark.csv: scenario columns + method,mse,sd (one row per method)
void save_benchmark(const std::filesystem::path& path, const ScenarioSpec& spec,
                    std::span<const BenchmarkResult> results);
// surface.csv: h_a,h_b,error (row-major); surface_markers.csv: marker rows
void save_surface(const std::filesystem::path& path, const ErrorSurface& surf);
void save_surface_markers(const std::filesystem::path& path,
                          const ErrorSurface& surf);

// Flat key=value configuration.  '#' starts a comment, blank lines are
// ignored, keys may not repeat.  Lookups record a note when a default is
// used; finish() rejects keys that were never consumed, so typos surface
// instead of silently meaning "default".
class ConfigMap {
 public:
  static ConfigMap load(const std::filesystem::path& path);
  static ConfigMap from_string(const std::string& text, std::string origin);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  void ignore(const std::string& key);  // mark consumed without a note

  void finish() const;  // ConfigError on unconsumed keys
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
  std::vector<std::string> notes_;

  const std::string* lookup(const std::string& key);
};

// Reads every scenario key (model, sizes, kernel parameters, variances, rho,
// seed, replicates, optional geometry_a/geometry_b file paths), defaulting
// per ScenarioSpec's initializers.
ScenarioSpec scenario_from_config(ConfigMap& cfg);

}  // namespace clacorr
