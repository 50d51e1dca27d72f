#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glcp/graph.hpp"
#include "glcp/rng.hpp"

namespace glcp {

/// Row-stochastic random-walk view of a graph. Rows are weighted-degree
/// normalized; zero-degree rows act as absorbing self-transitions so every row
/// still sums to one.
class TransitionView {
 public:
  explicit TransitionView(const SparseGraph& g);

  NodeId num_nodes() const { return g_->num_nodes(); }
  const SparseGraph& graph() const { return *g_; }

  /// out = in * M with the row-vector convention; preserves total mass.
  void apply(std::span<const double> in, std::span<double> out) const;

  /// One random-walk step from u; isolated nodes stay put.
  NodeId step(NodeId u, RngStream& rng) const;

  /// Weighted degree, with 1 standing in for isolated nodes so degree
  /// correction never divides by zero.
  double effective_degree(NodeId u) const {
    double d = g_->weighted_degree(u);
    return d > 0.0 ? d : 1.0;
  }

 private:
  const SparseGraph* g_;
  std::vector<std::size_t> row_offset_;  // start of each row in row_cum_
  std::vector<double> row_cum_;          // per-entry cumulative weight within each row
};

/// Truncated personalized random-walk mass from a seed:
/// sum_{k=0..K} beta (1-beta)^k e_seed M^k. Total mass is 1-(1-beta)^(K+1).
struct PprVector {
  NodeId seed = 0;
  double beta = 0.0;
  int truncation = 0;
  std::vector<double> mass;
};

PprVector ppr_power_iteration(const TransitionView& t, NodeId seed, double beta, int K);

/// Walk length with the truncated geometric law P[k] proportional to
/// beta (1-beta)^k on {0..K}, drawn by rejection so the conditioning is exact.
std::uint64_t sample_walk_length(double beta, int K, RngStream& rng);

/// Anchor draw: a random-walk endpoint at a truncated-geometric length from
/// the origin. Marginally the anchor follows the origin's normalized
/// truncated walk mass.
NodeId sample_anchor(const TransitionView& t, NodeId origin, double beta, int K,
                     RngStream& rng);

/// Localized calibration weights, aligned as calibration ids then the test id.
struct WeightVector {
  std::vector<NodeId> ids;
  std::vector<double> weights;
  double test_weight() const { return weights.back(); }
};

/// Degree-corrected anchor-mass weights over calibration nodes plus the test
/// node, normalized to sum to one. When the anchor mass misses the whole
/// candidate set the test node receives all the weight, which makes the
/// downstream quantile conservative. The normalizer is accumulated in id
/// order, so permuting calib_ids permutes the output without changing any
/// weight bit.
WeightVector structural_weights(const TransitionView& t, const PprVector& anchor_mass,
                                std::span<const NodeId> calib_ids, NodeId test_id);

/// Convenience overload that samples nothing: computes the anchor's mass
/// vector first, then delegates.
WeightVector structural_weights(const TransitionView& t, NodeId anchor,
                                std::span<const NodeId> calib_ids, NodeId test_id,
                                double beta, int K);

}  // namespace glcp
