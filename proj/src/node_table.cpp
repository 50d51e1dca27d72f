#include "glcp/node_table.hpp"

#include <cmath>
#include <string>

namespace glcp {

void NodeTable::validate() const {
  const std::size_t n = static_cast<std::size_t>(embeddings.rows());
  if (!embeddings.allFinite()) throw input_error("table: non-finite embedding entry");
  if (splits.size() != n) throw input_error("table: split assignment size mismatch");

  if (task == TaskKind::regression) {
    if (targets.size() != n) throw input_error("table: target column size mismatch");
    if (y_hat.size() != n) throw input_error("table: prediction column size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(targets[i])) throw input_error("table: non-finite target at node " + std::to_string(i));
      if (!std::isfinite(y_hat[i])) throw input_error("table: non-finite prediction at node " + std::to_string(i));
    }
  } else {
    if (num_classes < 2) throw input_error("table: classification needs at least two classes");
    if (labels.size() != n) throw input_error("table: label column size mismatch");
    if (class_probs.rows() != static_cast<Eigen::Index>(n) ||
        class_probs.cols() != num_classes)
      throw input_error("table: probability matrix shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] < 0 || labels[i] >= num_classes)
        throw input_error("table: label out of range at node " + std::to_string(i));
      double sum = 0.0;
      for (int c = 0; c < num_classes; ++c) {
        double p = class_probs(static_cast<Eigen::Index>(i), c);
        if (!std::isfinite(p) || p < 0.0)
          throw input_error("table: invalid probability at node " + std::to_string(i));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw input_error("table: probability row does not sum to one at node " +
                          std::to_string(i));
    }
  }
}

}  // namespace glcp
