#pragma once

#include <Eigen/Dense>
#include <vector>

#include "glcp/types.hpp"

namespace glcp {

/// Per-node data for one dataset: frozen-model embeddings and predictions,
/// ground truth, and the split assignment. Row i always refers to node i.
struct NodeTable {
  TaskKind task = TaskKind::regression;
  Eigen::MatrixXd embeddings;  // n x d

  std::vector<double> targets;  // regression ground truth
  std::vector<int> labels;      // classification ground truth
  int num_classes = 0;

  std::vector<double> y_hat;    // regression point predictions
  Eigen::MatrixXd class_probs;  // n x num_classes probability rows

  std::vector<Split> splits;

  NodeId num_nodes() const { return static_cast<NodeId>(embeddings.rows()); }

  std::vector<NodeId> ids_in_split(Split s) const {
    std::vector<NodeId> ids;
    for (NodeId u = 0; u < splits.size(); ++u)
      if (splits[u] == s) ids.push_back(u);
    return ids;
  }

  /// Cross-checks all per-node arrays against the embedding row count and the
  /// task kind; throws input_error on any inconsistency.
  void validate() const;
};

}  // namespace glcp
