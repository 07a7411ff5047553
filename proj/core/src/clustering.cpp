#include "clacorr/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "clacorr/errors.hpp"
#include "clacorr/rng.hpp"
#include "clacorr/stats.hpp"

namespace clacorr {

namespace {

constexpr double kSymmetryTol = 1e-8;

void check_intra(const CorrelationMatrix& corr, const char* op) {
  if (!corr.square())
    throw ShapeError(std::string(op) + ": correlation matrix is " +
                     std::to_string(corr.entries.rows()) + "x" +
                     std::to_string(corr.entries.cols()) + ", expected square");
  const auto& m = corr.entries;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m(i, i) - 1.0) > kSymmetryTol)
      throw DomainError(std::string(op) + ": diagonal entry " + std::to_string(i) +
                        " is not 1");
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol)
        throw DomainError(std::string(op) + ": matrix is not symmetric at (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
  }
}

// Union-find over leaves, used to materialize flat clusterings.
struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Applies the first `count` merges and labels clusters contiguously from 0
// in order of first appearance along the leaf order.
Clustering collapse(const Dendrogram& d, int count, double cut_height) {
  const int n = d.leaf_count();
  Dsu dsu(n);
  // a representative leaf for every dendrogram node
  std::vector<int> any_leaf(n + d.merges.size());
  std::iota(any_leaf.begin(), any_leaf.begin() + n, 0);
  for (int s = 0; s < static_cast<int>(d.merges.size()); ++s) {
    any_leaf[n + s] = any_leaf[d.merges[s].left];
    if (s < count)
      dsu.unite(any_leaf[d.merges[s].left], any_leaf[d.merges[s].right]);
  }
  Clustering out;
  out.region_id = d.region_id;
  out.voxel_ids = d.leaves;
  out.assignments.resize(n);
  std::vector<int> label(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = dsu.find(i);
    if (label[root] < 0) label[root] = next++;
    out.assignments[i] = label[root];
  }
  out.cut_height = cut_height;
  out.n_clusters = next;
  return out;
}

}  // namespace

Dendrogram ward_dendrogram(const CorrelationMatrix& corr, std::string region_id) {
  check_intra(corr, "ward_dendrogram");
  const int n = static_cast<int>(corr.entries.rows());
  Dendrogram out{std::move(region_id), corr.row_ids, {}};
  if (n <= 1) return out;
  out.merges.reserve(n - 1);

  // squared Ward distances between active clusters, kept dense and symmetric
  Eigen::MatrixXd d2 =
      (2.0 * (Eigen::MatrixXd::Ones(n, n) - corr.entries)).cwiseMax(0.0);
  d2.diagonal().setZero();

  std::vector<int> node(n), size(n, 1);
  std::iota(node.begin(), node.end(), 0);
  std::vector<char> active(n, 1);

  // Per-slot cached nearest partner.  Among equal distances the partner with
  // the smallest node id wins, which makes the global choice below pick the
  // lexicographically smallest (left, right) node pair.
  struct Best {
    double v = std::numeric_limits<double>::infinity();
    int j = -1;
  };
  std::vector<Best> best(n);

  auto rescan = [&](int i) {
    Best b;
    for (int j = 0; j < n; ++j) {
      if (!active[j] || j == i) continue;
      const double v = d2(i, j);
      if (v < b.v || (v == b.v && b.j >= 0 && node[j] < node[b.j]))
        b = {v, j};
    }
    best[i] = b;
  };
  for (int i = 0; i < n; ++i) rescan(i);

  auto pair_key = [&](int i, int j) {
    return std::pair<int, int>(std::min(node[i], node[j]),
                               std::max(node[i], node[j]));
  };

  double last_height = 0.0;
  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    double bv = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!active[i] || best[i].j < 0) continue;
      const double v = best[i].v;
      if (v < bv ||
          (v == bv && pair_key(i, best[i].j) < pair_key(bi, bj))) {
        bv = v;
        bi = i;
        bj = best[i].j;
      }
    }

    const auto [left, right] = pair_key(bi, bj);
    // Ward is reducible, so heights are monotone up to rounding; clamp the
    // few-ulp noise rather than emit an inversion.
    const double height = std::max(std::sqrt(std::max(bv, 0.0)), last_height);
    last_height = height;
    out.merges.push_back({left, right, height, size[bi] + size[bj]});

    // Lance-Williams update of squared distances to the merged cluster
    const double dij = d2(bi, bj);
    const double ni = size[bi], nj = size[bj];
    for (int k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double nk = size[k];
      const double v = ((ni + nk) * d2(bi, k) + (nj + nk) * d2(bj, k) -
                        nk * dij) /
                       (ni + nj + nk);
      d2(bi, k) = d2(k, bi) = v;
    }

    node[bi] = n + step;
    size[bi] += size[bj];
    active[bj] = 0;
    rescan(bi);
    for (int k = 0; k < n; ++k) {
      if (!active[k] || k == bi) continue;
      if (best[k].j == bi || best[k].j == bj) {
        rescan(k);
      } else {
        const double v = d2(k, bi);
        if (v < best[k].v ||
            (v == best[k].v && pair_key(k, bi) < pair_key(k, best[k].j)))
          best[k] = {v, bi};
      }
    }
  }
  return out;
}

Clustering cut_dendrogram(const Dendrogram& d, double h) {
  if (std::isnan(h) || h < 0.0)
    throw DomainError("cut_dendrogram: height must be >= 0");
  int count = 0;
  while (count < static_cast<int>(d.merges.size()) &&
         d.merges[count].height <= h)
    ++count;
  return collapse(d, count, std::isfinite(h) ? h : d.root_height());
}

Clustering cut_dendrogram_to_k(const Dendrogram& d, int k) {
  const int n = d.leaf_count();
  if (k < 1 || k > n)
    throw DomainError("cut_dendrogram_to_k: k = " + std::to_string(k) +
                      " outside [1, " + std::to_string(n) + "]");
  const int count = n - k;
  return collapse(d, count, count == 0 ? 0.0 : d.merges[count - 1].height);
}

double h_max(const CorrelationMatrix& intra) {
  check_intra(intra, "h_max");
  const auto& m = intra.entries;
  if (m.rows() <= 1) return 0.0;
  double rmin = 1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) rmin = std::min(rmin, m(i, j));
  return correlation_to_distance(rmin);
}

HeightRule HeightRule::parse(const std::string& text) {
  if (text == "maxu") return {Kind::maxu, 0.0};
  if (text == "silhouette") return {Kind::silhouette, 0.0};
  if (text.rfind("fixed:", 0) == 0) {
    const std::string num = text.substr(6);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(num, &used);
    } catch (const std::exception&) {
      throw ConfigError("height rule: bad fixed height '" + num + "'");
    }
    if (used != num.size() || !std::isfinite(v) || v < 0.0)
      throw ConfigError("height rule: bad fixed height '" + num + "'");
    return {Kind::fixed, v};
  }
  throw ConfigError("unknown height rule '" + text +
                    "' (expected maxu, silhouette, or fixed:<h>)");
}

std::string HeightRule::label() const {
  switch (kind) {
    case Kind::maxu:
      return "maxu";
    case Kind::silhouette:
      return "silhouette";
    case Kind::fixed: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "fixed:%g", fixed_height);
      return buf;
    }
  }
  return "?";
}

HeightSelection select_height_silhouette(const Dendrogram& d,
                                         const CorrelationMatrix& intra,
                                         int k_min, int k_max) {
  check_intra(intra, "select_height_silhouette");
  const int n = d.leaf_count();
  if (static_cast<int>(intra.entries.rows()) != n)
    throw ShapeError("select_height_silhouette: matrix size " +
                     std::to_string(intra.entries.rows()) + " vs " +
                     std::to_string(n) + " leaves");
  if (k_max <= 0) k_max = std::min(n - 1, 50);
  k_min = std::max(k_min, 2);
  k_max = std::min(k_max, n - 1);
  if (k_min > k_max)
    throw DegenerateClusteringError(
        "select_height_silhouette: no admissible cluster count for " +
        std::to_string(n) + " voxels");

  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dist(i, j) = correlation_to_distance(intra.entries(i, j));

  bool found = false;
  HeightSelection sel{0.0, {}, -std::numeric_limits<double>::infinity()};
  for (int k = k_min; k <= k_max; ++k) {
    Clustering c = cut_dendrogram_to_k(d, k);
    const auto members = cluster_members(c);
    double sum = 0.0;
    int defined = 0;
    for (int i = 0; i < n; ++i) {
      const int ci = c.assignments[i];
      if (members[ci].size() < 2) continue;  // silhouette undefined
      double a = 0.0;
      for (int m : members[ci])
        if (m != i) a += dist(i, m);
      a /= static_cast<double>(members[ci].size() - 1);
      double b = std::numeric_limits<double>::infinity();
      for (int cj = 0; cj < c.n_clusters; ++cj) {
        if (cj == ci) continue;
        double s = 0.0;
        for (int m : members[cj]) s += dist(i, m);
        b = std::min(b, s / static_cast<double>(members[cj].size()));
      }
      const double denom = std::max(a, b);
      sum += denom > 0.0 ? (b - a) / denom : 0.0;
      ++defined;
    }
    if (defined == 0) continue;
    const double score = sum / defined;
    // strict improvement only: ties resolve toward fewer clusters
    if (score > sel.silhouette) {
      sel = {c.cut_height, std::move(c), score};
      found = true;
    }
  }
  if (!found)
    throw DegenerateClusteringError(
        "select_height_silhouette: silhouette undefined for every cut in [" +
        std::to_string(k_min) + ", " + std::to_string(k_max) + "]");
  return sel;
}

Clustering apply_height_rule(const Dendrogram& d, const CorrelationMatrix& intra,
                             const HeightRule& rule) {
  switch (rule.kind) {
    case HeightRule::Kind::maxu:
      return cut_dendrogram(d, h_max(intra));
    case HeightRule::Kind::silhouette:
      return select_height_silhouette(d, intra).clustering;
    case HeightRule::Kind::fixed:
      return cut_dendrogram(d, rule.fixed_height);
  }
  throw DomainError("apply_height_rule: bad rule");
}

Clustering kmeans_clusters(const UScoreMatrix& u, int k, std::uint64_t seed,
                           std::string region_id) {
  const int n = static_cast<int>(u.scores.rows());
  if (k < 1 || k > n)
    throw DomainError("kmeans_clusters: k = " + std::to_string(k) +
                      " outside [1, " + std::to_string(n) + "]");
  const Eigen::MatrixXd& x = u.scores;
  auto engine = rng::engine(seed, rng::stream_kmeans);

  Eigen::MatrixXd centers(k, x.cols());
  std::vector<char> chosen(n, 0);
  const int first = static_cast<int>(
      std::uniform_int_distribution<long long>(0, n - 1)(engine));
  centers.row(0) = x.row(first);
  chosen[first] = 1;
  Eigen::VectorXd mind2 =
      (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    int pick = -1;
    double vmax = -1.0;
    for (int i = 0; i < n; ++i)
      if (!chosen[i] && mind2(i) > vmax) {
        vmax = mind2(i);
        pick = i;
      }
    centers.row(c) = x.row(pick);
    chosen[pick] = 1;
    mind2 = mind2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(n, -1), fresh(n);
  for (int iter = 0; iter < 100; ++iter) {
    for (int i = 0; i < n; ++i) {
      int bc = 0;
      double bd = (x.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double v = (x.row(i) - centers.row(c)).squaredNorm();
        if (v < bd) {
          bd = v;
          bc = c;
        }
      }
      fresh[i] = bc;
    }
    // deterministic empty-cluster repair: donate the point farthest from its
    // center out of any cluster that can spare one
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) ++count[fresh[i]];
    for (int e = 0; e < k; ++e) {
      if (count[e] > 0) continue;
      int donor = -1;
      double far = -1.0;
      for (int i = 0; i < n; ++i) {
        if (count[fresh[i]] < 2) continue;
        const double v = (x.row(i) - centers.row(fresh[i])).squaredNorm();
        if (v > far) {
          far = v;
          donor = i;
        }
      }
      --count[fresh[donor]];
      fresh[donor] = e;
      ++count[e];
    }
    if (fresh == assign) break;
    assign = fresh;
    for (int c = 0; c < k; ++c) centers.row(c).setZero();
    for (int i = 0; i < n; ++i) centers.row(assign[i]) += x.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(count[c]);
  }

  // contiguous labels in order of first appearance
  std::vector<int> relabel(k, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (relabel[assign[i]] < 0) relabel[assign[i]] = next++;
    assign[i] = relabel[assign[i]];
  }
  return Clustering{std::move(region_id), u.voxel_ids, std::move(assign), -1.0, k};
}

Clustering random_clusters(const std::vector<std::string>& voxel_ids, int k,
                           std::uint64_t seed, std::string region_id) {
  const int n = static_cast<int>(voxel_ids.size());
  if (k < 1 || k > n)
    throw DomainError("random_clusters: k = " + std::to_string(k) +
                      " outside [1, " + std::to_string(n) + "]");
  auto engine = rng::engine(seed, rng::stream_random_assign);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i)
    labels[i] = static_cast<int>(
        std::uniform_int_distribution<int>(0, k - 1)(engine));
  // plant one voxel per cluster so the assignment is surjective
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(
        std::uniform_int_distribution<int>(0, i)(engine));
    std::swap(perm[i], perm[j]);
  }
  for (int c = 0; c < k; ++c) labels[perm[c]] = c;
  return Clustering{std::move(region_id), voxel_ids, std::move(labels), -1.0, k};
}

}  // namespace clacorr
