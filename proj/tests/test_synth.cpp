#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "glcp/graph.hpp"
#include "glcp/synth.hpp"

using namespace glcp;

TEST_CASE("block assignment is contiguous and near-equal") {
  std::vector<int> blocks = sbm_blocks(10, 3);
  CHECK(blocks == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 2, 2, 2});
  std::vector<int> even = sbm_blocks(8, 4);
  CHECK(even == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
  CHECK(std::is_sorted(even.begin(), even.end()));
  CHECK_THROWS_AS(sbm_blocks(5, 0), param_error);
  CHECK_THROWS_AS(sbm_blocks(2, 5), param_error);
}

TEST_CASE("edge rates respect the block structure") {
  SbmSpec spec;
  spec.num_nodes = 400;
  spec.num_blocks = 4;
  spec.intra_prob = 0.2;
  spec.inter_prob = 0.01;
  spec.seed = 5;
  std::vector<int> blocks = sbm_blocks(spec.num_nodes, spec.num_blocks);
  SparseGraph g = sbm_graph(spec, blocks);

  std::size_t intra = 0, inter = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (NodeId v : g.neighbors(u)) {
      if (v <= u) continue;
      (blocks[u] == blocks[v] ? intra : inter) += 1;
    }
  // 4 blocks of 100: 4*C(100,2) = 19800 intra pairs, 60000 inter pairs.
  double intra_rate = static_cast<double>(intra) / 19800.0;
  double inter_rate = static_cast<double>(inter) / 60000.0;
  CHECK(intra_rate == doctest::Approx(spec.intra_prob).epsilon(0.1));
  CHECK(inter_rate == doctest::Approx(spec.inter_prob).epsilon(0.25));

  SparseGraph again = sbm_graph(spec, blocks);
  CHECK(again.num_entries() == g.num_entries());
}

TEST_CASE("neighborhood smoothing matches a dense normalized propagation") {
  using EdgeList = std::vector<std::pair<NodeId, NodeId>>;
  SparseGraph g = SparseGraph::from_edges(4, EdgeList{{0, 1}, {1, 2}, {2, 3}});
  Eigen::MatrixXd x(4, 2);
  x << 1.0, 0.0, 0.0, 1.0, 2.0, -1.0, 1.0, 1.0;

  // Dense reference: (D+I)^(-1/2) (A+I) (D+I)^(-1/2) applied per layer.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 2) = a(2, 1) = 1.0;
  a(2, 3) = a(3, 2) = 1.0;
  Eigen::MatrixXd norm = a + Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd dinv = (a.rowwise().sum().array() + 1.0).rsqrt();
  Eigen::MatrixXd hat = dinv.asDiagonal() * norm * dinv.asDiagonal();

  Eigen::MatrixXd ref = x;
  for (int layer = 0; layer < 2; ++layer) ref = hat * ref;
  Eigen::MatrixXd got = smoothed_features(g, x, 2);
  CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-12);

  CHECK((smoothed_features(g, x, 0) - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(smoothed_features(g, x, -1), param_error);
  CHECK_THROWS_AS(smoothed_features(g, Eigen::MatrixXd::Zero(3, 2), 1), input_error);
}

TEST_CASE("split fractions produce exact floor counts") {
  std::array<double, 4> fracs = {0.4, 0.1, 0.1, 0.4};
  std::vector<Split> splits = make_splits(800, fracs, 17);
  std::array<std::size_t, 4> counts = {0, 0, 0, 0};
  for (Split s : splits) counts[static_cast<std::size_t>(s)] += 1;
  CHECK(counts[0] == 320);
  CHECK(counts[1] == 80);
  CHECK(counts[2] == 80);
  CHECK(counts[3] == 320);

  // Different seeds shuffle membership, not counts.
  std::vector<Split> other = make_splits(800, fracs, 18);
  CHECK(other != splits);
  std::array<std::size_t, 4> counts2 = {0, 0, 0, 0};
  for (Split s : other) counts2[static_cast<std::size_t>(s)] += 1;
  CHECK(counts == counts2);

  // Remainders fall to the last non-zero fraction via the cumulative floor.
  std::vector<Split> seven = make_splits(7, {0.5, 0.0, 0.0, 0.5}, 3);
  std::array<std::size_t, 4> c7 = {0, 0, 0, 0};
  for (Split s : seven) c7[static_cast<std::size_t>(s)] += 1;
  CHECK(c7[0] == 3);
  CHECK(c7[3] == 4);

  CHECK_THROWS_AS(make_splits(10, {0.5, 0.5, 0.5, 0.0}, 1), param_error);
  CHECK_THROWS_AS(make_splits(10, {-0.1, 0.5, 0.3, 0.3}, 1), param_error);
}

TEST_CASE("classification bundles carry calibrated structure") {
  SbmSpec spec;
  spec.num_nodes = 300;
  spec.num_blocks = 3;
  spec.intra_prob = 0.1;
  spec.inter_prob = 0.005;
  spec.feature_dim = 8;
  spec.label_noise = 0.1;
  spec.task = TaskKind::classification;
  spec.seed = 11;
  SynthBundle b = make_sbm_bundle(spec, 2, {0.4, 0.1, 0.1, 0.4});

  b.table.validate();
  CHECK(b.graph.num_nodes() == 300);
  CHECK(b.table.num_nodes() == 300);
  CHECK(b.table.num_classes == 3);
  CHECK(b.blocks == sbm_blocks(300, 3));

  // Labels mostly follow blocks (noise 0.1).
  std::size_t agree = 0;
  for (NodeId u = 0; u < 300; ++u)
    if (b.table.labels[u] == b.blocks[u]) ++agree;
  CHECK(static_cast<double>(agree) / 300.0 > 0.8);

  // The surrogate beats chance by a wide margin on held-out nodes.
  std::size_t correct = 0, total = 0;
  for (NodeId u : b.table.ids_in_split(Split::test)) {
    int arg = 0;
    for (int c = 1; c < 3; ++c)
      if (b.table.class_probs(u, c) > b.table.class_probs(u, arg)) arg = c;
    correct += arg == b.table.labels[u] ? 1 : 0;
    ++total;
  }
  CHECK(total == 120);
  CHECK(static_cast<double>(correct) / static_cast<double>(total) > 0.6);

  // Probability rows are proper distributions.
  for (NodeId u = 0; u < 300; ++u) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
      CHECK(b.table.class_probs(u, c) >= 0.0);
      sum += b.table.class_probs(u, c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("regression bundles predict block-level targets") {
  SbmSpec spec;
  spec.num_nodes = 240;
  spec.num_blocks = 4;
  spec.intra_prob = 0.12;
  spec.inter_prob = 0.008;
  spec.feature_dim = 8;
  spec.label_noise = 0.2;
  spec.task = TaskKind::regression;
  spec.seed = 23;
  SynthBundle b = make_sbm_bundle(spec, 2, {0.5, 0.1, 0.1, 0.3});
  b.table.validate();
  CHECK(b.table.task == TaskKind::regression);
  CHECK(b.table.targets.size() == 240);
  CHECK(b.table.y_hat.size() == 240);

  // Residuals on test nodes should be far below the between-block spread.
  double mse = 0.0;
  std::size_t total = 0;
  for (NodeId u : b.table.ids_in_split(Split::test)) {
    double r = b.table.targets[u] - b.table.y_hat[u];
    mse += r * r;
    ++total;
  }
  mse /= static_cast<double>(total);
  CHECK(mse < 0.5);  // block means spread over {0,1,2,3}, noise sd 0.2
}

TEST_CASE("bundle generation is reproducible and seed-sensitive") {
  SbmSpec spec;
  spec.num_nodes = 150;
  spec.num_blocks = 3;
  spec.intra_prob = 0.1;
  spec.inter_prob = 0.01;
  spec.feature_dim = 6;
  spec.seed = 31;
  SynthBundle a = make_sbm_bundle(spec, 2, {0.4, 0.1, 0.1, 0.4});
  SynthBundle b = make_sbm_bundle(spec, 2, {0.4, 0.1, 0.1, 0.4});
  CHECK(a.graph.num_entries() == b.graph.num_entries());
  CHECK((a.table.embeddings - b.table.embeddings).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.table.labels == b.table.labels);
  CHECK(a.table.splits == b.table.splits);
  CHECK((a.table.class_probs - b.table.class_probs).cwiseAbs().maxCoeff() == 0.0);

  spec.seed = 32;
  SynthBundle c = make_sbm_bundle(spec, 2, {0.4, 0.1, 0.1, 0.4});
  CHECK(c.table.labels != a.table.labels);
}

TEST_CASE("surrogate fitting rejects degenerate training splits") {
  SbmSpec spec;
  spec.num_nodes = 60;
  spec.num_blocks = 3;
  spec.seed = 41;
  spec.feature_dim = 4;
  SynthBundle b = make_sbm_bundle(spec, 1, {0.4, 0.2, 0.2, 0.2});
  // Drop every training node of class 0 and refit.
  NodeTable broken = b.table;
  for (NodeId u = 0; u < broken.num_nodes(); ++u)
    if (broken.splits[u] == Split::train && broken.labels[u] == 0)
      broken.splits[u] = Split::valid;
  CHECK_THROWS_AS(fit_surrogate_predictions(broken), input_error);

  NodeTable empty_train = b.table;
  for (auto& s : empty_train.splits)
    if (s == Split::train) s = Split::test;
  CHECK_THROWS_AS(fit_surrogate_predictions(empty_train), input_error);
}
