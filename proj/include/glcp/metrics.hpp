#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glcp/conformal.hpp"
#include "glcp/node_table.hpp"

namespace glcp {

/// Per-node coverage indicators: interval membership for regression, label-set
/// membership for classification. Infinite intervals always cover.
std::vector<char> coverage_flags(const NodeTable& table,
                                 std::span<const PredictionOutput> outputs);

struct MarginalMetrics {
  double coverage = 0.0;
  double mean_size = 0.0;          // over finite-size predictions only
  double infinite_fraction = 0.0;  // fraction of predictions with infinite size
  std::size_t count = 0;
};

MarginalMetrics marginal_metrics(const NodeTable& table,
                                 std::span<const PredictionOutput> outputs);

/// The slab realizing the worst coverage: a contiguous window of points along
/// one projection direction.
struct SlabSpec {
  Eigen::VectorXd direction;
  double lower = 0.0;
  double upper = 0.0;
  double mass = 0.0;  // fraction of points inside the window
};

struct WscResult {
  double value = 0.0;
  SlabSpec slab;
};

/// Worst coverage over direction-projected contiguous windows holding at least
/// ceil(delta * m) points. Only window lengths in [w, 2w) are scanned: any
/// longer window splits into two admissible halves, one of which has coverage
/// at most the whole, so the minimum over the scanned lengths is exact.
/// Window comparisons use exact integer cross-multiplication.
WscResult worst_slab_coverage(const Eigen::MatrixXd& points, std::span<const char> covered,
                              int num_directions, double delta, std::uint64_t seed);

struct GroupCoverage {
  std::vector<std::string> names;
  std::vector<std::size_t> sizes;
  std::vector<double> coverages;  // NaN for empty groups
  double min_coverage = 0.0;      // over non-empty groups
};

/// Coverage split at the feature's tercile order statistics (ranks ceil(m/3)
/// and ceil(2m/3)); ties fall into the lower group. NaN feature values are
/// excluded. Needs at least three defined values; fully tied features collapse
/// to a single populated group.
GroupCoverage tercile_coverage(std::span<const double> feature,
                               std::span<const char> covered);

/// Coverage by k-means cluster (squared-error objective, greedy farthest-point
/// initialization, bounded Lloyd iterations). Deterministic for fixed input.
GroupCoverage kmeans_coverage(const Eigen::MatrixXd& points, std::span<const char> covered,
                              int k = 3, int max_iters = 50);

/// Empirical CDF sampled at evenly spaced quantile levels j/knots, j = 1..knots.
struct EcdfTable {
  std::vector<double> probs;
  std::vector<double> values;
};

EcdfTable weight_ecdf(std::vector<double> values, int knots = 512);

}  // namespace glcp
