#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "glcp/types.hpp"

namespace glcp {

/// Undirected weighted graph in compressed sparse row form.
///
/// Invariants, enforced at construction:
///   - neighbor lists sorted by node id, no duplicate entries
///   - symmetric: entry (u,v,w) present iff (v,u,w) is, with identical w
///   - weights finite and positive
///   - self-loops stored as a single (u,u) entry
/// Instances are immutable after construction.
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Builds an unweighted graph from directed edge rows. Both orientations are
  /// inserted and duplicates collapse to a single entry of weight 1.
  static SparseGraph from_edges(NodeId num_nodes,
                                std::span<const std::pair<NodeId, NodeId>> edges);

  /// Builds from fully materialized CSR arrays; validates every invariant.
  static SparseGraph from_csr(NodeId num_nodes, std::vector<std::size_t> row_ptr,
                              std::vector<NodeId> col_idx, std::vector<double> weights);

  NodeId num_nodes() const { return num_nodes_; }

  /// Number of stored directed entries (each undirected edge counts twice,
  /// self-loops once).
  std::size_t num_entries() const { return col_idx_.size(); }

  std::span<const NodeId> neighbors(NodeId u) const {
    check_node(u);
    return {col_idx_.data() + row_ptr_[u], col_idx_.data() + row_ptr_[u + 1]};
  }

  std::span<const double> weights(NodeId u) const {
    check_node(u);
    return {weights_.data() + row_ptr_[u], weights_.data() + row_ptr_[u + 1]};
  }

  /// Stored-entry count of the row, self-loop included.
  NodeId degree(NodeId u) const {
    check_node(u);
    return static_cast<NodeId>(row_ptr_[u + 1] - row_ptr_[u]);
  }

  double weighted_degree(NodeId u) const {
    check_node(u);
    return weighted_degrees_[u];
  }

  bool has_edge(NodeId u, NodeId v) const;

  /// Stored weight of (u,v), or 0 when the entry is absent.
  double edge_weight(NodeId u, NodeId v) const;

  /// Sum of all stored entry weights (off-diagonal weights counted twice).
  double total_weight() const { return total_weight_; }

 private:
  void check_node(NodeId u) const {
    if (u >= num_nodes_) throw input_error("node id out of range");
  }
  void finalize();

  NodeId num_nodes_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<NodeId> col_idx_;
  std::vector<double> weights_;
  std::vector<double> weighted_degrees_;
  double total_weight_ = 0.0;
};

/// Fraction of neighbors sharing u's label; empty when u has no neighbor other
/// than itself. Labels must be present (non-negative) for u and its neighbors.
std::optional<double> node_homophily(const SparseGraph& g, std::span<const int> labels,
                                     NodeId u);

/// Largest |target(i) - target(j)| over stored edges, self-loops excluded.
double max_edge_target_gap(const SparseGraph& g, std::span<const double> targets);

/// Regression analogue: 1 - mean(|y_v - y_u|) / max_gap over neighbors of u.
/// With max_gap == 0 every neighborhood is perfectly aligned and the value is 1.
std::optional<double> node_homophily(const SparseGraph& g, std::span<const double> targets,
                                     NodeId u, double max_gap);

/// Mean node homophily over nodes where it is defined; errors when no node
/// qualifies (edgeless graph).
double graph_homophily(const SparseGraph& g, std::span<const int> labels);
double graph_homophily(const SparseGraph& g, std::span<const double> targets);

/// Local clustering coefficient; 0 when fewer than two distinct neighbors.
double clustering_coefficient(const SparseGraph& g, NodeId u);

}  // namespace glcp
