#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "glcp/graph.hpp"
#include "glcp/node_table.hpp"

namespace glcp {

/// Stochastic block model benchmark settings. Homophily is dialed through the
/// intra/inter edge probabilities and the label noise.
struct SbmSpec {
  NodeId num_nodes = 800;
  int num_blocks = 4;
  double intra_prob = 0.05;
  double inter_prob = 0.005;
  int feature_dim = 16;
  double label_noise = 0.1;
  TaskKind task = TaskKind::classification;
  std::uint64_t seed = 0;
};

/// Contiguous near-equal block assignment: node i belongs to floor(i*B/n).
std::vector<int> sbm_blocks(NodeId num_nodes, int num_blocks);

SparseGraph sbm_graph(const SbmSpec& spec, std::span<const int> blocks);

/// Symmetric-normalized neighborhood smoothing with a unit self-loop, applied
/// `layers` times. This is the frozen surrogate encoder.
Eigen::MatrixXd smoothed_features(const SparseGraph& g, const Eigen::MatrixXd& features,
                                  int layers);

/// Seeded shuffle split with cumulative-floor boundaries; fractions must be
/// non-negative and sum to one.
std::vector<Split> make_splits(NodeId num_nodes, const std::array<double, 4>& fractions,
                               std::uint64_t seed);

/// Fits the frozen surrogate head on the train split and fills predictions for
/// every node: a ridge readout for regression, a nearest-centroid softmax for
/// classification. Requires a non-empty train split covering every class.
void fit_surrogate_predictions(NodeTable& table);

struct SynthBundle {
  SparseGraph graph;
  NodeTable table;
  std::vector<int> blocks;
};

/// Full benchmark instance: graph, smoothed embeddings, labels, surrogate
/// predictions, and splits.
SynthBundle make_sbm_bundle(const SbmSpec& spec, int encode_layers,
                            const std::array<double, 4>& split_fractions);

}  // namespace glcp
