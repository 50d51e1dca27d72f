#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "glcp/graph.hpp"
#include "glcp/ppr.hpp"
#include "glcp/rng.hpp"

using namespace glcp;

namespace {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

SparseGraph path3() {
  return SparseGraph::from_edges(3, EdgeList{{0, 1}, {1, 2}});
}

SparseGraph random_connected(NodeId n, std::uint64_t seed, double extra_prob) {
  RngStream rng = RngStream::derive(seed, 105, 0);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 1; u < n; ++u)
    edges.push_back({u, static_cast<NodeId>(rng.uniform_below(u))});
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng.uniform() < extra_prob) edges.push_back({u, v});
  return SparseGraph::from_edges(n, edges);
}

Eigen::MatrixXd dense_transition(const SparseGraph& g) {
  const int n = static_cast<int>(g.num_nodes());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    double d = g.weighted_degree(u);
    if (d <= 0.0) {
      m(u, u) = 1.0;
      continue;
    }
    auto nbrs = g.neighbors(u);
    auto ws = g.weights(u);
    for (std::size_t k = 0; k < nbrs.size(); ++k) m(u, nbrs[k]) = ws[k] / d;
  }
  return m;
}

// Reference mass: explicit dense power sum of the same truncated series.
Eigen::VectorXd dense_truncated_mass(const SparseGraph& g, NodeId seed, double beta, int K) {
  Eigen::MatrixXd m = dense_transition(g);
  const int n = static_cast<int>(g.num_nodes());
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(n);
  v(seed) = 1.0;
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n);
  double coef = beta;
  for (int k = 0; k <= K; ++k) {
    acc += coef * v;
    v = v * m;
    coef *= 1.0 - beta;
  }
  return acc.transpose();
}

}  // namespace

TEST_CASE("row-vector transition on a short path") {
  SparseGraph g = path3();
  TransitionView t(g);
  std::vector<double> v = {1.0, 0.0, 0.0};
  std::vector<double> out(3);
  t.apply(v, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 1.0);
  CHECK(out[2] == 0.0);
  t.apply(out, v);
  CHECK(v[0] == doctest::Approx(0.5));
  CHECK(v[1] == 0.0);
  CHECK(v[2] == doctest::Approx(0.5));
}

TEST_CASE("transition preserves mass and absorbs at isolated nodes") {
  // Node 3 is isolated.
  SparseGraph g = SparseGraph::from_edges(4, EdgeList{{0, 1}, {1, 2}});
  TransitionView t(g);
  RngStream rng = RngStream::derive(2, 106, 0);
  std::vector<double> v(4), out(4);
  for (int trial = 0; trial < 20; ++trial) {
    for (auto& x : v) x = rng.uniform();
    double before = std::accumulate(v.begin(), v.end(), 0.0);
    t.apply(v, out);
    double after = std::accumulate(out.begin(), out.end(), 0.0);
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
  }
  v = {0.0, 0.0, 0.0, 0.7};
  t.apply(v, out);
  CHECK(out[3] == 0.7);
  CHECK(t.step(3, rng) == 3);
  CHECK(t.effective_degree(3) == 1.0);
  CHECK(t.effective_degree(1) == 2.0);
}

TEST_CASE("truncated walk mass matches a dense power sum") {
  for (std::uint64_t seed : {3u, 9u, 27u}) {
    SparseGraph g = random_connected(12, seed, 0.15);
    TransitionView t(g);
    for (double beta : {0.2, 0.5, 0.9}) {
      for (int K : {0, 3, 15}) {
        PprVector p = ppr_power_iteration(t, 4, beta, K);
        Eigen::VectorXd ref = dense_truncated_mass(g, 4, beta, K);
        for (int i = 0; i < 12; ++i)
          CHECK(p.mass[i] == doctest::Approx(ref(i)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("total truncated mass is 1-(1-beta)^(K+1)") {
  SparseGraph g = random_connected(20, 8, 0.1);
  TransitionView t(g);
  for (double beta : {0.05, 0.3, 1.0}) {
    for (int K : {0, 7, 40}) {
      PprVector p = ppr_power_iteration(t, 11, beta, K);
      double total = std::accumulate(p.mass.begin(), p.mass.end(), 0.0);
      CHECK(total == doctest::Approx(1.0 - std::pow(1.0 - beta, K + 1)).epsilon(1e-9));
    }
  }
}

TEST_CASE("an isolated seed keeps all truncated mass") {
  SparseGraph g = SparseGraph::from_edges(5, EdgeList{{0, 1}, {1, 2}});
  TransitionView t(g);
  PprVector p = ppr_power_iteration(t, 4, 0.3, 6);
  CHECK(p.mass[4] == doctest::Approx(1.0 - std::pow(0.7, 7)).epsilon(1e-12));
  for (int i = 0; i < 4; ++i) CHECK(p.mass[i] == 0.0);
}

TEST_CASE("walk mass satisfies degree reversibility on unweighted graphs") {
  // d_i pi_i[j] == d_j pi_j[i] for symmetric unweighted walks.
  SparseGraph g = random_connected(8, 13, 0.3);
  TransitionView t(g);
  std::vector<PprVector> all;
  for (NodeId u = 0; u < 8; ++u) all.push_back(ppr_power_iteration(t, u, 0.25, 12));
  for (NodeId i = 0; i < 8; ++i)
    for (NodeId j = 0; j < 8; ++j) {
      double lhs = g.weighted_degree(i) * all[i].mass[j];
      double rhs = g.weighted_degree(j) * all[j].mass[i];
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("walk length follows the truncated geometric law") {
  RngStream rng = RngStream::derive(7, 107, 0);
  const double beta = 0.4;
  const int K = 3;
  const int draws = 100000;
  std::vector<int> counts(K + 1, 0);
  for (int i = 0; i < draws; ++i) {
    std::uint64_t k = sample_walk_length(beta, K, rng);
    REQUIRE(k <= static_cast<std::uint64_t>(K));
    ++counts[k];
  }
  const double z = 1.0 - std::pow(1.0 - beta, K + 1);
  for (int k = 0; k <= K; ++k) {
    double expect = beta * std::pow(1.0 - beta, k) / z;
    CHECK(static_cast<double>(counts[k]) / draws == doctest::Approx(expect).epsilon(0.03));
  }
  for (int i = 0; i < 50; ++i) CHECK(sample_walk_length(1.0, 10, rng) == 0);
  for (int i = 0; i < 50; ++i) CHECK(sample_walk_length(0.3, 0, rng) == 0);
}

TEST_CASE("anchor draws follow the normalized walk mass") {
  SparseGraph g = random_connected(12, 31, 0.2);
  TransitionView t(g);
  const NodeId origin = 5;
  const double beta = 0.3;
  const int K = 8;
  PprVector p = ppr_power_iteration(t, origin, beta, K);
  double total = std::accumulate(p.mass.begin(), p.mass.end(), 0.0);

  RngStream rng = RngStream::derive(9, 108, 0);
  const int draws = 200000;
  std::vector<int> counts(12, 0);
  for (int i = 0; i < draws; ++i) ++counts[sample_anchor(t, origin, beta, K, rng)];
  double tv = 0.0;
  for (int u = 0; u < 12; ++u)
    tv += std::abs(static_cast<double>(counts[u]) / draws - p.mass[u] / total);
  CHECK(tv / 2.0 < 0.01);
}

TEST_CASE("localized weights normalize to one and ignore id order") {
  SparseGraph g = random_connected(15, 17, 0.2);
  TransitionView t(g);
  std::vector<NodeId> calib = {2, 5, 7, 9, 12};
  const NodeId test = 3;
  WeightVector w = structural_weights(t, 6, calib, test, 0.3, 20);
  REQUIRE(w.ids.size() == 6);
  CHECK(w.ids.back() == test);
  double sum = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  for (double x : w.weights) CHECK(x >= 0.0);

  std::vector<NodeId> shuffled = {9, 2, 12, 7, 5};
  WeightVector v = structural_weights(t, 6, shuffled, test, 0.3, 20);
  std::map<NodeId, double> by_id;
  for (std::size_t i = 0; i < w.ids.size(); ++i) by_id[w.ids[i]] = w.weights[i];
  for (std::size_t i = 0; i < v.ids.size(); ++i) CHECK(v.weights[i] == by_id[v.ids[i]]);
}

TEST_CASE("weights are degree-corrected anchor mass") {
  SparseGraph g = random_connected(10, 23, 0.25);
  TransitionView t(g);
  std::vector<NodeId> calib = {0, 1, 4, 8};
  const NodeId test = 6;
  const NodeId anchor = 2;
  PprVector p = ppr_power_iteration(t, anchor, 0.25, 15);
  WeightVector w = structural_weights(t, p, calib, test);
  std::vector<NodeId> cand = {0, 1, 4, 8, 6};
  std::vector<NodeId> sorted_cand = cand;
  std::sort(sorted_cand.begin(), sorted_cand.end());
  double denom = 0.0;
  for (NodeId u : sorted_cand) denom += p.mass[u] / t.effective_degree(u);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    double expect = (p.mass[cand[i]] / t.effective_degree(cand[i])) / denom;
    CHECK(w.weights[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("an unreachable candidate set pushes all weight to the test node") {
  // Two components; anchor mass stays in the first, candidates sit in the second.
  SparseGraph g = SparseGraph::from_edges(6, EdgeList{{0, 1}, {1, 2}, {3, 4}, {4, 5}});
  TransitionView t(g);
  std::vector<NodeId> calib = {3, 4};
  WeightVector w = structural_weights(t, 0, calib, 5, 0.3, 10);
  CHECK(w.weights[0] == 0.0);
  CHECK(w.weights[1] == 0.0);
  CHECK(w.test_weight() == 1.0);
}

TEST_CASE("symmetric candidates on a complete graph get uniform weight") {
  // K6: all candidates are exchangeable when the anchor is outside the set.
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < 6; ++u)
    for (NodeId v = u + 1; v < 6; ++v) edges.push_back({u, v});
  SparseGraph g = SparseGraph::from_edges(6, edges);
  TransitionView t(g);
  std::vector<NodeId> calib = {0, 1, 2};
  WeightVector w = structural_weights(t, 5, calib, 3, 0.3, 12);
  for (double x : w.weights) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  SparseGraph g = path3();
  TransitionView t(g);
  CHECK_THROWS_AS(ppr_power_iteration(t, 3, 0.3, 5), input_error);
  CHECK_THROWS_AS(ppr_power_iteration(t, 0, 0.0, 5), param_error);
  CHECK_THROWS_AS(ppr_power_iteration(t, 0, 1.5, 5), param_error);
  CHECK_THROWS_AS(ppr_power_iteration(t, 0, 0.3, -1), param_error);
  std::vector<NodeId> dup = {1, 1};
  CHECK_THROWS_AS(structural_weights(t, 0, dup, 2, 0.3, 5), input_error);
}
