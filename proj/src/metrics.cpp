#include "glcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glcp/rng.hpp"

namespace glcp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const char> flags, std::span<const std::size_t> idx) {
  if (idx.empty()) return kNaN;
  std::size_t hits = 0;
  for (std::size_t i : idx) hits += flags[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

}  // namespace

std::vector<char> coverage_flags(const NodeTable& table,
                                 std::span<const PredictionOutput> outputs) {
  std::vector<char> flags(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& out = outputs[i];
    if (out.node_id >= table.num_nodes()) throw input_error("metrics: node id out of range");
    if (table.task == TaskKind::regression) {
      double y = table.targets[out.node_id];
      flags[i] = (y >= out.lower && y <= out.upper) ? 1 : 0;
    } else {
      flags[i] = std::binary_search(out.label_set.begin(), out.label_set.end(),
                                    table.labels[out.node_id])
                     ? 1
                     : 0;
    }
  }
  return flags;
}

MarginalMetrics marginal_metrics(const NodeTable& table,
                                 std::span<const PredictionOutput> outputs) {
  if (outputs.empty()) throw input_error("metrics: no predictions to evaluate");
  auto flags = coverage_flags(table, outputs);
  MarginalMetrics m;
  m.count = outputs.size();
  std::size_t covered = 0, infinite = 0, finite = 0;
  double size_sum = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    covered += flags[i] ? 1 : 0;
    double s = outputs[i].set_size(table.task);
    if (std::isinf(s)) {
      ++infinite;
    } else {
      size_sum += s;
      ++finite;
    }
  }
  m.coverage = static_cast<double>(covered) / static_cast<double>(m.count);
  m.infinite_fraction = static_cast<double>(infinite) / static_cast<double>(m.count);
  m.mean_size = finite > 0 ? size_sum / static_cast<double>(finite) : kNaN;
  return m;
}

WscResult worst_slab_coverage(const Eigen::MatrixXd& points, std::span<const char> covered,
                              int num_directions, double delta, std::uint64_t seed) {
  const std::size_t m = static_cast<std::size_t>(points.rows());
  if (m == 0) throw input_error("wsc: no points");
  if (covered.size() != m) throw input_error("wsc: indicator size mismatch");
  if (num_directions < 1) throw param_error("wsc: need at least one direction");
  if (!(delta > 0.0 && delta < 1.0)) throw param_error("wsc: delta must lie in (0,1)");
  const Eigen::Index d = points.cols();
  if (d < 1) throw input_error("wsc: zero-dimensional points");

  // Snap near-integer products so delta = 0.2, m = 10 yields w = 2, not 3.
  std::size_t w = static_cast<std::size_t>(
      std::ceil(delta * static_cast<double>(m) - 1e-9));
  if (w < 1) w = 1;

  std::int64_t best_num = -1, best_den = 1;
  WscResult result;

  std::vector<double> proj(m);
  std::vector<std::size_t> order(m);
  std::vector<std::int64_t> prefix(m + 1);
  for (int dir = 0; dir < num_directions; ++dir) {
    RngStream rng = RngStream::derive(seed, streams::kWscDirection, static_cast<std::uint64_t>(dir));
    Eigen::VectorXd v(d);
    double norm = 0.0;
    do {
      for (Eigen::Index k = 0; k < d; ++k) v(k) = rng.normal();
      norm = v.norm();
    } while (norm == 0.0);
    v /= norm;

    for (std::size_t i = 0; i < m; ++i) proj[i] = points.row(static_cast<Eigen::Index>(i)).dot(v);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });
    prefix[0] = 0;
    for (std::size_t i = 0; i < m; ++i)
      prefix[i + 1] = prefix[i] + (covered[order[i]] ? 1 : 0);

    std::size_t max_len = std::min(m, 2 * w - 1);
    for (std::size_t len = w; len <= max_len; ++len) {
      for (std::size_t start = 0; start + len <= m; ++start) {
        std::int64_t num = prefix[start + len] - prefix[start];
        std::int64_t den = static_cast<std::int64_t>(len);
        bool better = best_num < 0 || num * best_den < best_num * den;
        if (better) {
          best_num = num;
          best_den = den;
          result.slab.direction = v;
          result.slab.lower = proj[order[start]];
          result.slab.upper = proj[order[start + len - 1]];
          result.slab.mass = static_cast<double>(len) / static_cast<double>(m);
        }
      }
    }
  }
  result.value = static_cast<double>(best_num) / static_cast<double>(best_den);
  return result;
}

GroupCoverage tercile_coverage(std::span<const double> feature,
                               std::span<const char> covered) {
  if (feature.size() != covered.size()) throw input_error("terciles: size mismatch");
  std::vector<std::size_t> defined;
  for (std::size_t i = 0; i < feature.size(); ++i)
    if (!std::isnan(feature[i])) defined.push_back(i);
  const std::size_t m = defined.size();
  if (m < 3) throw input_error("terciles: need at least three defined feature values");

  std::vector<double> sorted;
  sorted.reserve(m);
  for (std::size_t i : defined) sorted.push_back(feature[i]);
  std::sort(sorted.begin(), sorted.end());
  double q1 = sorted[(m + 2) / 3 - 1];
  double q2 = sorted[(2 * m + 2) / 3 - 1];

  std::vector<std::vector<std::size_t>> groups(3);
  for (std::size_t i : defined) {
    double f = feature[i];
    int g = f <= q1 ? 0 : (f <= q2 ? 1 : 2);
    groups[static_cast<std::size_t>(g)].push_back(i);
  }

  GroupCoverage out;
  out.names = {"low", "mid", "high"};
  out.min_coverage = std::numeric_limits<double>::infinity();
  for (const auto& g : groups) {
    out.sizes.push_back(g.size());
    double c = mean_of(covered, g);
    out.coverages.push_back(c);
    if (!g.empty()) out.min_coverage = std::min(out.min_coverage, c);
  }
  return out;
}

GroupCoverage kmeans_coverage(const Eigen::MatrixXd& points, std::span<const char> covered,
                              int k, int max_iters) {
  const std::size_t m = static_cast<std::size_t>(points.rows());
  if (m == 0) throw input_error("kmeans: no points");
  if (covered.size() != m) throw input_error("kmeans: indicator size mismatch");
  if (k < 1) throw param_error("kmeans: need at least one cluster");
  if (max_iters < 1) throw param_error("kmeans: need at least one iteration");
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), m);

  // Greedy farthest-point seeding: start farthest from the mean, then
  // repeatedly take the point with the largest distance to chosen centers.
  Eigen::RowVectorXd mean = points.colwise().mean();
  std::vector<Eigen::RowVectorXd> centers;
  std::vector<double> min_dist(m, std::numeric_limits<double>::infinity());
  {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      double dd = (points.row(static_cast<Eigen::Index>(i)) - mean).squaredNorm();
      if (dd > best_d) {
        best_d = dd;
        best = i;
      }
    }
    centers.push_back(points.row(static_cast<Eigen::Index>(best)));
  }
  while (centers.size() < kk) {
    for (std::size_t i = 0; i < m; ++i) {
      double dd =
          (points.row(static_cast<Eigen::Index>(i)) - centers.back()).squaredNorm();
      min_dist[i] = std::min(min_dist[i], dd);
    }
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (min_dist[i] > best_d) {
        best_d = min_dist[i];
        best = i;
      }
    }
    centers.push_back(points.row(static_cast<Eigen::Index>(best)));
  }

  std::vector<int> assign(m, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        double dd = (points.row(static_cast<Eigen::Index>(i)) - centers[c]).squaredNorm();
        if (dd < best_d) {
          best_d = dd;
          best = static_cast<int>(c);
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(points.cols());
      std::size_t count = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (assign[i] == static_cast<int>(c)) {
          sum += points.row(static_cast<Eigen::Index>(i));
          ++count;
        }
      }
      if (count > 0) centers[c] = sum / static_cast<double>(count);
    }
  }

  GroupCoverage out;
  out.min_coverage = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < m; ++i)
      if (assign[i] == static_cast<int>(c)) members.push_back(i);
    out.names.push_back("cluster_" + std::to_string(c));
    out.sizes.push_back(members.size());
    double cov = mean_of(covered, members);
    out.coverages.push_back(cov);
    if (!members.empty()) out.min_coverage = std::min(out.min_coverage, cov);
  }
  return out;
}

EcdfTable weight_ecdf(std::vector<double> values, int knots) {
  if (values.empty()) throw input_error("ecdf: no values");
  if (knots < 1) throw param_error("ecdf: need at least one knot");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  EcdfTable table;
  table.probs.reserve(static_cast<std::size_t>(knots));
  table.values.reserve(static_cast<std::size_t>(knots));
  for (int j = 1; j <= knots; ++j) {
    double p = static_cast<double>(j) / static_cast<double>(knots);
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(n) - 1e-9));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    table.probs.push_back(p);
    table.values.push_back(values[rank - 1]);
  }
  return table;
}

}  // namespace glcp
