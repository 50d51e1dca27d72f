#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>

#include "glcp/graph.hpp"
#include "glcp/kernel.hpp"

namespace glcp {

/// Threshold-search settings for edge densification.
struct DensifyConfig {
  double tau0 = 0.5;   // initial similarity threshold, in (0,1)
  double gamma = 0.1;  // multiplicative threshold step, in (0,1)
  int max_iters = 20;  // augmentation passes before giving up
};

/// Admissible band for the densified-to-original total weight ratio.
struct DensifyBounds {
  double lower = 1.0;
  double upper = 1.0;
};

struct DensifyResult {
  SparseGraph graph;
  double tau = 0.0;             // threshold that produced the returned graph
  double edge_ratio = 1.0;      // total weight ratio against the original
  int iterations = 0;           // augmentation passes executed
  std::size_t edges_added = 0;  // unordered pairs added by the final pass
  DensifyBounds bounds;
  bool converged = false;
};

/// Ratio band as a function of graph homophily and the initial threshold.
/// The band is frozen before iteration; it never tracks the moving threshold.
DensifyBounds densification_bounds(double homophily, double tau0);

/// Adds kernel-weighted edges between non-adjacent pairs whose similarity
/// reaches tau. Original edges are preserved with their stored weights and
/// self-pairs are never considered. Returns the augmented graph and the count
/// of pairs added.
std::pair<SparseGraph, std::size_t> augment_edges(const SparseGraph& g,
                                                  const Eigen::MatrixXd& z,
                                                  const AnisotropicKernel& kernel,
                                                  double tau, int num_threads = 1);

/// Iterates augment_edges from the original graph, nudging the threshold until
/// the weight ratio lands inside the admissible band or the pass budget runs
/// out (the last iterate is returned with converged = false in that case).
DensifyResult densify(const SparseGraph& g, const Eigen::MatrixXd& z,
                      const AnisotropicKernel& kernel, double homophily,
                      const DensifyConfig& cfg, int num_threads = 1);

}  // namespace glcp
