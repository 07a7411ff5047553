#include "clacorr/io.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "clacorr/errors.hpp"

namespace clacorr {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError(path.string(), 0, 0, "cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(strip_cr(std::move(line)));
  return lines;
}

// strict finite-double parse; row/col are 1-based file coordinates
double parse_double(const std::string& field, const std::string& path,
                    std::size_t row, std::size_t col) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + field.size() || field.empty())
    throw ParseError(path, row, col, "not a number: '" + field + "'");
  if (!std::isfinite(v))
    throw ParseError(path, row, col, "non-finite value: '" + field + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out)
    throw ParseError(path.string(), 0, 0, "cannot open file for writing");
  return out;
}

void expect_header(const std::vector<std::string>& lines, const std::string& header,
                   const std::string& path) {
  if (lines.empty() || lines[0] != header)
    throw ParseError(path, 1, 1, "expected header '" + header + "'");
}

std::string time_label(int t, int width) {
  std::string digits = std::to_string(t);
  return "t" + std::string(width > static_cast<int>(digits.size())
                               ? width - digits.size()
                               : 0,
                           '0') +
         digits;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> Parcellation::regions() const {
  std::vector<std::string> out;
  for (const auto& [voxel, region] : entries)
    if (std::find(out.begin(), out.end(), region) == out.end())
      out.push_back(region);
  std::sort(out.begin(), out.end());
  return out;
}

Parcellation load_parcellation(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  expect_header(lines, "voxel_id,region", path.string());
  Parcellation p;
  for (std::size_t row = 2; row <= lines.size(); ++row) {
    const std::string& line = lines[row - 1];
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2)
      throw ParseError(path.string(), row, fields.size(),
                       "expected 2 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty())
      throw ParseError(path.string(), row, 1, "empty voxel id");
    if (fields[1].empty())
      throw ParseError(path.string(), row, 2, "empty region label");
    if (!p.region_of.emplace(fields[0], fields[1]).second)
      throw ConsistencyError("parcellation lists voxel " + fields[0] + " twice");
    p.entries.emplace_back(fields[0], fields[1]);
  }
  if (p.entries.empty())
    throw ConsistencyError("parcellation " + path.string() + " is empty");
  return p;
}

void save_parcellation(const std::filesystem::path& path, const Parcellation& p) {
  auto out = open_out(path);
  out << "voxel_id,region\n";
  for (const auto& [voxel, region] : p.entries)
    out << voxel << ',' << region << '\n';
}

std::vector<TimeSeriesMatrix> load_timeseries(const std::filesystem::path& path,
                                              const Parcellation& p) {
  const auto lines = read_lines(path);
  if (lines.empty())
    throw ParseError(path.string(), 1, 1, "empty file");
  const auto header = split_fields(lines[0]);
  if (header.size() < 2 || header[0] != "voxel_id")
    throw ParseError(path.string(), 1, 1, "expected header 'voxel_id,t0001,...'");
  const std::size_t n = header.size() - 1;

  struct RegionRows {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
  };
  std::map<std::string, RegionRows> grouped;
  std::unordered_set<std::string> seen;
  for (std::size_t row = 2; row <= lines.size(); ++row) {
    const std::string& line = lines[row - 1];
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != n + 1)
      throw ParseError(path.string(), row, fields.size(),
                       "expected " + std::to_string(n + 1) + " fields, got " +
                           std::to_string(fields.size()));
    const std::string& id = fields[0];
    if (id.empty()) throw ParseError(path.string(), row, 1, "empty voxel id");
    if (!seen.insert(id).second)
      throw ConsistencyError("time series lists voxel " + id + " twice");
    const auto region = p.region_of.find(id);
    if (region == p.region_of.end())
      throw ConsistencyError("voxel " + id + " missing from parcellation");
    std::vector<double> values(n);
    for (std::size_t t = 0; t < n; ++t)
      values[t] = parse_double(fields[t + 1], path.string(), row, t + 2);
    auto& bucket = grouped[region->second];
    bucket.ids.push_back(id);
    bucket.rows.push_back(std::move(values));
  }
  for (const auto& [voxel, region] : p.entries)
    if (!seen.count(voxel))
      throw ConsistencyError("voxel " + voxel +
                             " in parcellation but missing from data");

  std::vector<TimeSeriesMatrix> out;
  out.reserve(grouped.size());
  for (auto& [region, bucket] : grouped) {  // std::map: sorted label order
    Eigen::MatrixXd values(bucket.rows.size(), n);
    for (std::size_t i = 0; i < bucket.rows.size(); ++i)
      for (std::size_t t = 0; t < n; ++t) values(i, t) = bucket.rows[i][t];
    out.push_back(make_timeseries(region, std::move(bucket.ids), std::move(values)));
  }
  return out;
}

void save_timeseries(const std::filesystem::path& path,
                     std::span<const TimeSeriesMatrix> regions) {
  if (regions.empty())
    throw ShapeError("save_timeseries: no regions");
  const Eigen::Index n = regions[0].time_count();
  for (const auto& ts : regions)
    if (ts.time_count() != n)
      throw ShapeError("save_timeseries: unequal time axes");
  auto out = open_out(path);
  const int width = std::max<int>(4, std::to_string(n).size());
  out << "voxel_id";
  for (Eigen::Index t = 1; t <= n; ++t)
    out << ',' << time_label(static_cast<int>(t), width);
  out << '\n';
  for (const auto& ts : regions)
    for (Eigen::Index i = 0; i < ts.voxel_count(); ++i) {
      out << ts.voxel_ids[i];
      for (Eigen::Index t = 0; t < n; ++t)
        out << ',' << format_double(ts.values(i, t));
      out << '\n';
    }
}

VoxelGeometry load_geometry(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  expect_header(lines, "x,y,z", path.string());
  VoxelGeometry g;
  for (std::size_t row = 2; row <= lines.size(); ++row) {
    const std::string& line = lines[row - 1];
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3)
      throw ParseError(path.string(), row, fields.size(),
                       "expected 3 fields, got " + std::to_string(fields.size()));
    g.coordinates.push_back({parse_double(fields[0], path.string(), row, 1),
                             parse_double(fields[1], path.string(), row, 2),
                             parse_double(fields[2], path.string(), row, 3)});
  }
  return g;
}

void save_clusters(const std::filesystem::path& path,
                   std::span<const Clustering> clusterings) {
  auto out = open_out(path);
  out << "region,voxel_id,cluster_id\n";
  for (const auto& c : clusterings)
    for (std::size_t i = 0; i < c.voxel_ids.size(); ++i)
      out << c.region_id << ',' << c.voxel_ids[i] << ',' << c.assignments[i]
          << '\n';
}

void save_heights(const std::filesystem::path& path,
                  std::span<const HeightRecord> records) {
  auto out = open_out(path);
  out << "region,h_used,h_max,n_clusters\n";
  for (const auto& r : records)
    out << r.region << ',' << format_double(r.h_used) << ','
        << format_double(r.h_max) << ',' << r.n_clusters << '\n';
}

void save_estimates(const std::filesystem::path& path,
                    std::span<const EstimateRecord> records) {
  auto out = open_out(path);
  out << "region_a,region_b,estimator,value\n";
  for (const auto& r : records)
    out << r.region_a << ',' << r.region_b << ',' << r.estimator << ','
        << format_double(r.value) << '\n';
}

std::vector<EstimateRecord> load_estimates(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  expect_header(lines, "region_a,region_b,estimator,value", path.string());
  std::vector<EstimateRecord> out;
  for (std::size_t row = 2; row <= lines.size(); ++row) {
    const std::string& line = lines[row - 1];
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4)
      throw ParseError(path.string(), row, fields.size(),
                       "expected 4 fields, got " + std::to_string(fields.size()));
    out.push_back({fields[0], fields[1], fields[2],
                   parse_double(fields[3], path.string(), row, 4)});
  }
  return out;
}

void save_cla_distribution(const std::filesystem::path& path,
                           std::span<const EstimateSet> sets) {
  auto out = open_out(path);
  out << "region_a,region_b,cluster_a,cluster_b,value\n";
  for (const auto& est : sets)
    for (const auto& cp : est.cluster_pair_estimates)
      out << est.region_pair.first << ',' << est.region_pair.second << ','
          << cp.cluster_a << ',' << cp.cluster_b << ',' << format_double(cp.r)
          << '\n';
}

void save_benchmark(const std::filesystem::path& path, const ScenarioSpec& spec,
                    std::span<const BenchmarkResult> results) {
  auto out = open_out(path);
  out << "model,n_voxels_a,n_voxels_b,n_time,replicates,eta_minus_a,"
         "eta_minus_b,range_a,range_b,kappa,sigma2_a,sigma2_b,gamma2_a,"
         "gamma2_b,rho,seed,method,mse,sd\n";
  for (const auto& r : results) {
    out << to_string(spec.model) << ',' << spec.n_voxels_a << ','
        << spec.n_voxels_b << ',' << spec.n_time << ',' << spec.replicates
        << ',' << format_double(spec.eta_minus_a) << ','
        << format_double(spec.eta_minus_b) << ',' << format_double(spec.range_a)
        << ',' << format_double(spec.range_b) << ',' << format_double(spec.kappa)
        << ',' << format_double(spec.sigma2_a) << ','
        << format_double(spec.sigma2_b) << ',' << format_double(spec.gamma2_a)
        << ',' << format_double(spec.gamma2_b) << ',' << format_double(spec.rho)
        << ',' << spec.seed << ',' << r.method << ',' << format_double(r.mse)
        << ',' << format_double(r.sd) << '\n';
  }
}

void save_surface(const std::filesystem::path& path, const ErrorSurface& surf) {
  auto out = open_out(path);
  out << "h_a,h_b,error\n";
  for (std::size_t i = 0; i < surf.heights_a.size(); ++i)
    for (std::size_t j = 0; j < surf.heights_b.size(); ++j)
      out << format_double(surf.heights_a[i]) << ','
          << format_double(surf.heights_b[j]) << ','
          << format_double(surf.error(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(j)))
          << '\n';
}

void save_surface_markers(const std::filesystem::path& path,
                          const ErrorSurface& surf) {
  auto out = open_out(path);
  out << "marker,h_a,h_b,error\n";
  out << "h_max," << format_double(surf.at_h_max.h_a) << ','
      << format_double(surf.at_h_max.h_b) << ','
      << format_double(surf.at_h_max.error) << '\n';
  out << "argmin," << format_double(surf.at_argmin.h_a) << ','
      << format_double(surf.at_argmin.h_b) << ','
      << format_double(surf.at_argmin.error) << '\n';
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path.string());
}

ConfigMap ConfigMap::from_string(const std::string& text, std::string origin) {
  ConfigMap cfg;
  cfg.origin_ = std::move(origin);
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(std::move(line));
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(cfg.origin_ + ":" + std::to_string(row) +
                        ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(cfg.origin_ + ":" + std::to_string(row) + ": empty key");
    if (!cfg.values_.emplace(key, value).second)
      throw ConfigError(cfg.origin_ + ": duplicate key '" + key + "'");
  }
  return cfg;
}

bool ConfigMap::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string* ConfigMap::lookup(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) {
  if (const auto* v = lookup(key)) return *v;
  notes_.push_back("config: " + key + " = " + fallback + " (default)");
  return fallback;
}

std::string ConfigMap::require_string(const std::string& key) {
  if (const auto* v = lookup(key)) return *v;
  throw ConfigError(origin_ + ": missing required key '" + key + "'");
}

double ConfigMap::get_double(const std::string& key, double fallback) {
  if (const auto* v = lookup(key)) {
    const char* begin = v->c_str();
    char* end = nullptr;
    const double parsed = std::strtod(begin, &end);
    if (v->empty() || end != begin + v->size() || !std::isfinite(parsed))
      throw ConfigError(origin_ + ": key '" + key + "': bad number '" + *v + "'");
    return parsed;
  }
  char text[64];
  std::snprintf(text, sizeof(text), "%g", fallback);
  notes_.push_back("config: " + key + " = " + text + " (default)");
  return fallback;
}

int ConfigMap::get_int(const std::string& key, int fallback) {
  if (const auto* v = lookup(key)) {
    try {
      std::size_t used = 0;
      const long parsed = std::stol(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      if (parsed < INT_MIN || parsed > INT_MAX) throw std::out_of_range("range");
      return static_cast<int>(parsed);
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': bad integer '" + *v + "'");
    }
  }
  notes_.push_back("config: " + key + " = " + std::to_string(fallback) +
                   " (default)");
  return fallback;
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) {
  if (const auto* v = lookup(key)) {
    try {
      std::size_t used = 0;
      const unsigned long long parsed = std::stoull(*v, &used);
      if (used != v->size() || v->front() == '-')
        throw std::invalid_argument("trailing");
      return parsed;
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': bad unsigned integer '" +
                        *v + "'");
    }
  }
  notes_.push_back("config: " + key + " = " + std::to_string(fallback) +
                   " (default)");
  return fallback;
}

void ConfigMap::ignore(const std::string& key) { lookup(key); }

void ConfigMap::finish() const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key)) unknown.push_back(key);
  if (!unknown.empty()) {
    std::string msg = origin_ + ": unknown key(s):";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw ConfigError(msg);
  }
}

ScenarioSpec scenario_from_config(ConfigMap& cfg) {
  ScenarioSpec spec;
  spec.model = scenario_model_from(cfg.get_string("model", "toeplitz1d"));
  spec.n_voxels_a = cfg.get_int("n_voxels_a", spec.n_voxels_a);
  spec.n_voxels_b = cfg.get_int("n_voxels_b", spec.n_voxels_b);
  spec.n_time = cfg.get_int("n_time", spec.n_time);
  spec.replicates = cfg.get_int("replicates", spec.replicates);
  spec.eta_minus_a = cfg.get_double("eta_minus_a", spec.eta_minus_a);
  spec.eta_minus_b = cfg.get_double("eta_minus_b", spec.eta_minus_b);
  spec.range_a = cfg.get_double("range_a", spec.range_a);
  spec.range_b = cfg.get_double("range_b", spec.range_b);
  spec.kappa = cfg.get_double("kappa", spec.kappa);
  spec.sigma2_a = cfg.get_double("sigma2_a", spec.sigma2_a);
  spec.sigma2_b = cfg.get_double("sigma2_b", spec.sigma2_b);
  spec.gamma2_a = cfg.get_double("gamma2_a", spec.gamma2_a);
  spec.gamma2_b = cfg.get_double("gamma2_b", spec.gamma2_b);
  spec.rho = cfg.get_double("rho", spec.rho);
  spec.seed = cfg.get_u64("seed", spec.seed);
  if (cfg.has("geometry_a"))
    spec.geometry_a = load_geometry(cfg.require_string("geometry_a"));
  if (cfg.has("geometry_b"))
    spec.geometry_b = load_geometry(cfg.require_string("geometry_b"));
  validate(spec);
  return spec;
}

}  // namespace clacorr
