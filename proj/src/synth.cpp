#include "glcp/synth.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "glcp/rng.hpp"

namespace glcp {
namespace {

constexpr double kFeatureNoise = 0.3;

void validate_spec(const SbmSpec& spec) {
  if (spec.num_nodes < 2) throw param_error("sbm: need at least two nodes");
  if (spec.num_blocks < 1 || static_cast<NodeId>(spec.num_blocks) > spec.num_nodes)
    throw param_error("sbm: block count out of range");
  if (!(spec.intra_prob >= 0.0 && spec.intra_prob <= 1.0))
    throw param_error("sbm: intra_prob must lie in [0,1]");
  if (!(spec.inter_prob >= 0.0 && spec.inter_prob <= 1.0))
    throw param_error("sbm: inter_prob must lie in [0,1]");
  if (spec.feature_dim < 1) throw param_error("sbm: feature_dim must be positive");
  if (!(spec.label_noise >= 0.0)) throw param_error("sbm: label_noise must be non-negative");
  if (spec.task == TaskKind::classification && spec.label_noise > 1.0)
    throw param_error("sbm: classification label_noise must lie in [0,1]");
}

Eigen::MatrixXd block_prototypes(const SbmSpec& spec) {
  Eigen::MatrixXd proto = Eigen::MatrixXd::Zero(spec.num_blocks, spec.feature_dim);
  if (spec.feature_dim >= spec.num_blocks) {
    for (int b = 0; b < spec.num_blocks; ++b) proto(b, b) = 1.0;
  } else {
    for (int b = 0; b < spec.num_blocks; ++b) {
      RngStream rng = RngStream::derive(spec.seed, streams::kSbmPrototype,
                                        static_cast<std::uint64_t>(b));
      double norm = 0.0;
      do {
        for (int k = 0; k < spec.feature_dim; ++k) proto(b, k) = rng.normal();
        norm = proto.row(b).norm();
      } while (norm == 0.0);
      proto.row(b) /= norm;
    }
  }
  return proto;
}

}  // namespace

std::vector<int> sbm_blocks(NodeId num_nodes, int num_blocks) {
  if (num_blocks < 1 || static_cast<NodeId>(num_blocks) > num_nodes)
    throw param_error("sbm: block count out of range");
  std::vector<int> blocks(num_nodes);
  for (NodeId i = 0; i < num_nodes; ++i)
    blocks[i] = static_cast<int>((static_cast<std::uint64_t>(i) *
                                  static_cast<std::uint64_t>(num_blocks)) /
                                 num_nodes);
  return blocks;
}

SparseGraph sbm_graph(const SbmSpec& spec, std::span<const int> blocks) {
  validate_spec(spec);
  if (blocks.size() != spec.num_nodes) throw input_error("sbm: block assignment size mismatch");
  RngStream rng = RngStream::derive(spec.seed, streams::kSbmEdges, 0);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < spec.num_nodes; ++i) {
    for (NodeId j = i + 1; j < spec.num_nodes; ++j) {
      double p = blocks[i] == blocks[j] ? spec.intra_prob : spec.inter_prob;
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return SparseGraph::from_edges(spec.num_nodes, edges);
}

Eigen::MatrixXd smoothed_features(const SparseGraph& g, const Eigen::MatrixXd& features,
                                  int layers) {
  if (features.rows() != static_cast<Eigen::Index>(g.num_nodes()))
    throw input_error("encode: feature row count mismatch");
  if (layers < 0) throw param_error("encode: layer count must be non-negative");
  const NodeId n = g.num_nodes();
  Eigen::VectorXd inv_s(n);
  for (NodeId u = 0; u < n; ++u) inv_s(u) = 1.0 / std::sqrt(g.weighted_degree(u) + 1.0);

  Eigen::MatrixXd x = features;
  Eigen::MatrixXd next(x.rows(), x.cols());
  for (int layer = 0; layer < layers; ++layer) {
    for (NodeId u = 0; u < n; ++u) {
      Eigen::RowVectorXd acc = x.row(u) * inv_s(u);  // unit self-loop term
      auto nbrs = g.neighbors(u);
      auto ws = g.weights(u);
      for (std::size_t k = 0; k < nbrs.size(); ++k)
        acc += ws[k] * inv_s(nbrs[k]) * x.row(nbrs[k]);
      next.row(u) = acc * inv_s(u);
    }
    x.swap(next);
  }
  return x;
}

std::vector<Split> make_splits(NodeId num_nodes, const std::array<double, 4>& fractions,
                               std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw param_error("splits: fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw param_error("splits: fractions must sum to one");

  std::vector<NodeId> ids(num_nodes);
  for (NodeId i = 0; i < num_nodes; ++i) ids[i] = i;
  RngStream rng = RngStream::derive(seed, streams::kSplitShuffle, 0);
  for (NodeId i = num_nodes; i > 1; --i) {
    std::uint64_t j = rng.uniform_below(i);
    std::swap(ids[i - 1], ids[j]);
  }

  // Cumulative-floor boundaries; the slack absorbs decimal fractions that
  // land a hair under an integer.
  std::array<std::size_t, 5> bounds{};
  bounds[0] = 0;
  double cum = 0.0;
  for (int k = 0; k < 4; ++k) {
    cum += fractions[static_cast<std::size_t>(k)];
    bounds[static_cast<std::size_t>(k) + 1] = static_cast<std::size_t>(
        std::floor(cum * static_cast<double>(num_nodes) + 1e-9));
  }
  bounds[4] = num_nodes;

  std::vector<Split> splits(num_nodes, Split::train);
  const std::array<Split, 4> kinds{Split::train, Split::valid, Split::calib, Split::test};
  for (int k = 0; k < 4; ++k)
    for (std::size_t i = bounds[static_cast<std::size_t>(k)];
         i < bounds[static_cast<std::size_t>(k) + 1]; ++i)
      splits[ids[i]] = kinds[static_cast<std::size_t>(k)];
  return splits;
}

void fit_surrogate_predictions(NodeTable& table) {
  auto train = table.ids_in_split(Split::train);
  if (train.empty()) throw input_error("surrogate: empty train split");
  const Eigen::Index d = table.embeddings.cols();
  const Eigen::Index n = table.embeddings.rows();

  if (table.task == TaskKind::regression) {
    Eigen::MatrixXd z(train.size(), d);
    Eigen::VectorXd y(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      z.row(static_cast<Eigen::Index>(i)) = table.embeddings.row(train[i]);
      y(static_cast<Eigen::Index>(i)) = table.targets[train[i]];
    }
    Eigen::RowVectorXd zmean = z.colwise().mean();
    double ymean = y.mean();
    Eigen::MatrixXd zc = z.rowwise() - zmean;
    Eigen::VectorXd yc = y.array() - ymean;
    Eigen::MatrixXd gram = zc.transpose() * zc;
    double lam = 1e-3 * gram.trace() / static_cast<double>(d);
    if (!(lam > 0.0)) lam = 1e-12;
    gram.diagonal().array() += lam;
    Eigen::VectorXd beta = gram.ldlt().solve(zc.transpose() * yc);
    table.y_hat.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      table.y_hat[static_cast<std::size_t>(i)] =
          ymean + (table.embeddings.row(i) - zmean).dot(beta);
    return;
  }

  const int C = table.num_classes;
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(C, d);
  std::vector<std::size_t> counts(static_cast<std::size_t>(C), 0);
  for (NodeId id : train) {
    int y = table.labels[id];
    centroids.row(y) += table.embeddings.row(id);
    ++counts[static_cast<std::size_t>(y)];
  }
  for (int c = 0; c < C; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw input_error("surrogate: class " + std::to_string(c) + " missing from train split");
    centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  double tau = 0.0;
  for (NodeId id : train)
    tau += (table.embeddings.row(id) - centroids.row(table.labels[id])).squaredNorm();
  tau /= static_cast<double>(train.size());
  if (!(tau > 0.0)) tau = 1e-12;

  table.class_probs.resize(n, C);
  std::vector<double> logits(static_cast<std::size_t>(C));
  for (Eigen::Index i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < C; ++c) {
      logits[static_cast<std::size_t>(c)] =
          -(table.embeddings.row(i) - centroids.row(c)).squaredNorm() / tau;
      m = std::max(m, logits[static_cast<std::size_t>(c)]);
    }
    double denom = 0.0;
    for (int c = 0; c < C; ++c) {
      logits[static_cast<std::size_t>(c)] = std::exp(logits[static_cast<std::size_t>(c)] - m);
      denom += logits[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < C; ++c)
      table.class_probs(i, c) = logits[static_cast<std::size_t>(c)] / denom;
  }
}

SynthBundle make_sbm_bundle(const SbmSpec& spec, int encode_layers,
                            const std::array<double, 4>& split_fractions) {
  validate_spec(spec);
  SynthBundle bundle;
  bundle.blocks = sbm_blocks(spec.num_nodes, spec.num_blocks);
  bundle.graph = sbm_graph(spec, bundle.blocks);

  Eigen::MatrixXd proto = block_prototypes(spec);
  Eigen::MatrixXd features(spec.num_nodes, spec.feature_dim);
  for (NodeId i = 0; i < spec.num_nodes; ++i) {
    RngStream rng = RngStream::derive(spec.seed, streams::kSbmFeature, i);
    for (int k = 0; k < spec.feature_dim; ++k)
      features(i, k) = proto(bundle.blocks[i], k) + kFeatureNoise * rng.normal();
  }

  NodeTable& table = bundle.table;
  table.task = spec.task;
  table.embeddings = smoothed_features(bundle.graph, features, encode_layers);
  if (spec.task == TaskKind::classification) {
    table.num_classes = spec.num_blocks;
    table.labels.resize(spec.num_nodes);
    for (NodeId i = 0; i < spec.num_nodes; ++i) {
      RngStream rng = RngStream::derive(spec.seed, streams::kSbmLabel, i);
      int label = bundle.blocks[i];
      if (spec.num_blocks > 1 && rng.uniform() < spec.label_noise) {
        std::uint64_t pick = rng.uniform_below(static_cast<std::uint64_t>(spec.num_blocks - 1));
        label = pick >= static_cast<std::uint64_t>(label) ? static_cast<int>(pick) + 1
                                                          : static_cast<int>(pick);
      }
      table.labels[i] = label;
    }
  } else {
    table.targets.resize(spec.num_nodes);
    for (NodeId i = 0; i < spec.num_nodes; ++i) {
      RngStream rng = RngStream::derive(spec.seed, streams::kSbmLabel, i);
      table.targets[i] = static_cast<double>(bundle.blocks[i]) + spec.label_noise * rng.normal();
    }
  }

  table.splits = make_splits(spec.num_nodes, split_fractions, spec.seed);
  fit_surrogate_predictions(table);
  table.validate();
  return bundle;
}

}  // namespace glcp
