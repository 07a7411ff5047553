// clacorr: cluster-averaged correlation estimation between regions of
// correlated, noisy signals.  See README.md for the file formats and the
// config keys accepted by each subcommand.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clacorr/clustering.hpp"
#include "clacorr/errors.hpp"
#include "clacorr/estimators.hpp"
#include "clacorr/evaluation.hpp"
#include "clacorr/io.hpp"
#include "clacorr/pipeline.hpp"
#include "clacorr/synthetic.hpp"
#include "clacorr/types.hpp"

namespace fs = std::filesystem;
using clacorr::ConfigMap;

namespace {

// Options shared by the config-driven subcommands.  A flag given on the
// command line wins over the same setting in the config file.
struct CommonArgs {
  std::string config_path;
  std::string out_dir;       // --out
  std::string height;        // --height
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_height,
                      bool with_seed, bool with_threads) {
  cmd->add_option("--config", args.config_path, "Path to a key=value config file")
      ->required();
  cmd->add_option("--out", args.out_dir, "Output directory (overrides config)");
  if (with_height) {
    cmd->add_option("--height", args.height,
                    "Height rule: maxu | silhouette | fixed:<h>");
  }
  if (with_seed) {
    cmd->add_option("--seed", args.seed, "Seed override");
  }
  if (with_threads) {
    cmd->add_option("--threads", args.threads, "Worker thread count");
  }
}

// Relative paths inside a config file are resolved against the directory
// containing the config file, so a config directory is self-contained.
fs::path resolve(const std::string& value, const fs::path& config_path) {
  fs::path p(value);
  if (p.is_absolute()) return p;
  return config_path.parent_path() / p;
}

void print_notes(const ConfigMap& cfg) {
  for (const auto& note : cfg.notes()) std::cerr << "note: " << note << "\n";
}

fs::path require_out_dir(ConfigMap& cfg, const CommonArgs& args) {
  if (!args.out_dir.empty()) {
    cfg.ignore("out");
    return fs::path(args.out_dir);
  }
  if (!cfg.has("out")) {
    throw clacorr::ConfigError(
        "no output directory: pass --out or set out= in the config");
  }
  return resolve(cfg.require_string("out"), args.config_path);
}

int resolve_threads(ConfigMap& cfg, const CommonArgs& args) {
  int threads;
  if (args.threads) {
    cfg.ignore("threads");
    threads = *args.threads;
  } else {
    threads = cfg.get_int("threads", 1);
  }
  if (threads < 1) {
    throw clacorr::ConfigError("threads must be >= 1, got " +
                               std::to_string(threads));
  }
  return threads;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      item += c;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

// --- simulate ---------------------------------------------------------------

int run_simulate(const CommonArgs& args) {
  ConfigMap cfg = ConfigMap::load(args.config_path);
  clacorr::ScenarioSpec spec = clacorr::scenario_from_config(cfg);
  fs::path out = require_out_dir(cfg, args);
  cfg.finish();
  print_notes(cfg);
  if (args.seed) spec.seed = *args.seed;

  fs::create_directories(out);
  const clacorr::CovarianceModel model = clacorr::build_covariance(spec);

  // One parcellation covers every replicate; the voxel ids never change.
  {
    auto [a, b] = clacorr::sample_scenario(spec, model, 0);
    clacorr::Parcellation parc;
    for (const auto& v : a.voxel_ids) parc.entries.emplace_back(v, a.region_id);
    for (const auto& v : b.voxel_ids) parc.entries.emplace_back(v, b.region_id);
    for (const auto& e : parc.entries) parc.region_of[e.first] = e.second;
    clacorr::save_parcellation(out / "parcellation.csv", parc);
  }

  for (int rep = 0; rep < spec.replicates; ++rep) {
    auto [a, b] = clacorr::sample_scenario(spec, model, rep);
    char name[32];
    std::snprintf(name, sizeof(name), "timeseries_r%03d.csv", rep);
    const clacorr::TimeSeriesMatrix regions[] = {a, b};
    clacorr::save_timeseries(out / name, regions);
  }
  std::cerr << "wrote " << spec.replicates << " replicate(s) to " << out.string()
            << "\n";
  return 0;
}

// --- estimate ---------------------------------------------------------------

int run_estimate(const CommonArgs& args) {
  ConfigMap cfg = ConfigMap::load(args.config_path);
  const fs::path data = resolve(cfg.require_string("data"), args.config_path);
  const fs::path parc_path =
      resolve(cfg.require_string("parcellation"), args.config_path);

  clacorr::PipelineOptions opt;
  std::string height;
  if (!args.height.empty()) {
    cfg.ignore("height");
    height = args.height;
  } else {
    height = cfg.get_string("height", "maxu");
  }
  opt.height = clacorr::HeightRule::parse(height);
  opt.threads = resolve_threads(cfg, args);

  const std::string estimators = cfg.get_string("estimators", "ac,ca,cla");
  opt.want_ac = opt.want_ca = opt.want_cla = false;
  for (const auto& name : split_list(estimators)) {
    if (name == "ac") {
      opt.want_ac = true;
    } else if (name == "ca") {
      opt.want_ca = true;
    } else if (name == "cla") {
      opt.want_cla = true;
    } else {
      throw clacorr::ConfigError("unknown estimator '" + name +
                                 "' (expected ac, ca, or cla)");
    }
  }
  fs::path out = require_out_dir(cfg, args);
  cfg.finish();
  print_notes(cfg);

  const clacorr::Parcellation parc = clacorr::load_parcellation(parc_path);
  const std::vector<clacorr::TimeSeriesMatrix> regions =
      clacorr::load_timeseries(data, parc);
  const clacorr::PipelineResult result = clacorr::run_pipeline(regions, opt);
  clacorr::write_pipeline_outputs(out, result, opt);
  std::cerr << "wrote estimates for " << regions.size() << " region(s) to "
            << out.string() << "\n";
  return 0;
}

// --- benchmark --------------------------------------------------------------

int run_benchmark_cmd(const CommonArgs& args) {
  ConfigMap cfg = ConfigMap::load(args.config_path);
  clacorr::ScenarioSpec spec = clacorr::scenario_from_config(cfg);

  std::vector<clacorr::MethodSpec> methods;
  for (const auto& name :
       split_list(cfg.get_string("methods", "ac,ca,cla:ward"))) {
    methods.push_back(clacorr::MethodSpec::parse(name));
  }
  std::vector<clacorr::HeightRule> rules;
  std::string heights;
  if (!args.height.empty()) {
    cfg.ignore("heights");
    heights = args.height;
  } else {
    heights = cfg.get_string("heights", "maxu");
  }
  for (const auto& name : split_list(heights)) {
    rules.push_back(clacorr::HeightRule::parse(name));
  }
  const int threads = resolve_threads(cfg, args);
  fs::path out = require_out_dir(cfg, args);
  cfg.finish();
  print_notes(cfg);
  if (args.seed) spec.seed = *args.seed;

  const std::vector<clacorr::BenchmarkResult> results =
      clacorr::run_benchmark(spec, methods, rules, threads);
  fs::create_directories(out);
  clacorr::save_benchmark(out / "benchmark.csv", spec, results);
  for (const auto& r : results) {
    std::cerr << r.method << ": mse=" << clacorr::format_double(r.mse)
              << " sd=" << clacorr::format_double(r.sd) << "\n";
  }
  return 0;
}

// --- surface ----------------------------------------------------------------

int run_surface(const CommonArgs& args) {
  ConfigMap cfg = ConfigMap::load(args.config_path);
  clacorr::ScenarioSpec spec = clacorr::scenario_from_config(cfg);
  const int grid = cfg.get_int("grid", 25);
  const int rep = cfg.get_int("replicate", 0);
  const double rho_true = cfg.get_double("rho_true", spec.rho);
  fs::path out = require_out_dir(cfg, args);
  cfg.finish();
  print_notes(cfg);
  if (args.seed) spec.seed = *args.seed;

  auto [a, b] = clacorr::sample_scenario(spec, rep);
  const clacorr::ErrorSurface surf =
      clacorr::error_surface(a, b, rho_true, grid, grid);
  fs::create_directories(out);
  clacorr::save_surface(out / "surface.csv", surf);
  clacorr::save_surface_markers(out / "surface_markers.csv", surf);
  std::cerr << "h_max error=" << clacorr::format_double(surf.at_h_max.error)
            << " grid min=" << clacorr::format_double(surf.at_argmin.error)
            << "\n";
  return 0;
}

// --- ccc --------------------------------------------------------------------

int run_ccc(const std::string& path_a, const std::string& path_b) {
  const auto rows_a = clacorr::load_estimates(path_a);
  const auto rows_b = clacorr::load_estimates(path_b);

  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, double> by_key;
  for (const auto& r : rows_b) {
    auto key = Key{r.region_a, r.region_b, r.estimator};
    if (!by_key.emplace(key, r.value).second) {
      throw clacorr::ConsistencyError("duplicate estimate row in " + path_b +
                                      " for (" + r.region_a + "," + r.region_b +
                                      "," + r.estimator + ")");
    }
  }

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      per_estimator;
  std::set<Key> seen_a;
  for (const auto& r : rows_a) {
    auto key = Key{r.region_a, r.region_b, r.estimator};
    if (!seen_a.insert(key).second) {
      throw clacorr::ConsistencyError("duplicate estimate row in " + path_a +
                                      " for (" + r.region_a + "," + r.region_b +
                                      "," + r.estimator + ")");
    }
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      throw clacorr::ConsistencyError(
          "estimate (" + r.region_a + "," + r.region_b + "," + r.estimator +
          ") present in " + path_a + " but missing from " + path_b);
    }
    auto& [xs, ys] = per_estimator[r.estimator];
    xs.push_back(r.value);
    ys.push_back(it->second);
  }
  if (seen_a.size() != by_key.size()) {
    throw clacorr::ConsistencyError("row counts differ: " + path_a + " has " +
                                    std::to_string(seen_a.size()) + ", " +
                                    path_b + " has " +
                                    std::to_string(by_key.size()));
  }

  std::cout << "estimator,ccc\n";
  for (const auto& [name, vectors] : per_estimator) {
    if (vectors.first.size() < 2) {
      throw clacorr::ShapeError(
          "ccc: estimator '" + name + "' has " +
          std::to_string(vectors.first.size()) +
          " region pair(s); concordance needs at least 2");
    }
    const double ccc = clacorr::concordance_ccc(vectors.first, vectors.second);
    std::cout << name << "," << clacorr::format_double(ccc) << "\n";
  }
  return 0;
}

const char* class_name(clacorr::ErrorClass c) {
  switch (c) {
    case clacorr::ErrorClass::usage:
      return "usage";
    case clacorr::ErrorClass::data:
      return "data";
    case clacorr::ErrorClass::numeric:
      return "numeric";
  }
  return "unknown";
}

void report_error(const clacorr::Error& e) {
  nlohmann::json record{{"error", e.name()},
                        {"class", class_name(e.error_class())},
                        {"exit_code", e.exit_code()},
                        {"message", e.what()}};
  std::cerr << record.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Cluster-averaged correlation estimation between regions of noisy, "
      "mutually correlated signals"};
  app.require_subcommand(1);

  CommonArgs sim_args, est_args, bench_args, surf_args;
  std::string ccc_a, ccc_b;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Write synthetic datasets from a scenario config");
  add_common_flags(sim, sim_args, /*height=*/false, /*seed=*/true,
                   /*threads=*/false);

  CLI::App* est = app.add_subcommand(
      "estimate", "Cluster each region and estimate every region-pair "
                  "correlation (AC, CA, CLA)");
  add_common_flags(est, est_args, /*height=*/true, /*seed=*/false,
                   /*threads=*/true);

  CLI::App* bench = app.add_subcommand(
      "benchmark", "Monte-Carlo MSE comparison of estimators on a scenario");
  add_common_flags(bench, bench_args, /*height=*/true, /*seed=*/true,
                   /*threads=*/true);

  CLI::App* surf = app.add_subcommand(
      "surface", "Cluster-level error over a grid of cut heights");
  add_common_flags(surf, surf_args, /*height=*/false, /*seed=*/true,
                   /*threads=*/false);

  CLI::App* ccc = app.add_subcommand(
      "ccc", "Concordance (CCC) per estimator between two estimates.csv files");
  ccc->add_option("estimates_a", ccc_a, "First estimates.csv")->required();
  ccc->add_option("estimates_b", ccc_b, "Second estimates.csv")->required();

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return run_simulate(sim_args);
    if (est->parsed()) return run_estimate(est_args);
    if (bench->parsed()) return run_benchmark_cmd(bench_args);
    if (surf->parsed()) return run_surface(surf_args);
    if (ccc->parsed()) return run_ccc(ccc_a, ccc_b);
    return 2;
  } catch (const CLI::ParseError& e) {
    // CLI11's exit() prints help/usage text; remap its status to 2 so all
    // usage problems share one exit code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const clacorr::Error& e) {
    report_error(e);
    return e.exit_code();
  } catch (const std::exception& e) {
    nlohmann::json record{{"error", "InternalError"},
                          {"exit_code", 1},
                          {"message", e.what()}};
    std::cerr << record.dump() << "\n";
    return 1;
  }
}
