#include <doctest.h>

#include <utility>
#include <vector>

#include "glcp/graph.hpp"
#include "glcp/rng.hpp"

using namespace glcp;

namespace {

SparseGraph triangle() {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {1, 2}, {0, 2}};
  return SparseGraph::from_edges(3, edges);
}

}  // namespace

TEST_CASE("from_edges symmetrizes and collapses duplicates at unit weight") {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {1, 0}, {0, 1}, {2, 2}};
  SparseGraph g = SparseGraph::from_edges(3, edges);
  CHECK(g.num_entries() == 3);  // (0,1), (1,0), and one (2,2)
  CHECK(g.edge_weight(0, 1) == 1.0);
  CHECK(g.edge_weight(1, 0) == 1.0);
  CHECK(g.edge_weight(2, 2) == 1.0);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(2) == 1);
  CHECK(g.weighted_degree(2) == 1.0);
  CHECK(g.total_weight() == 3.0);
  CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("from_edges reports the offending row for bad ids") {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {5, 1}};
  CHECK_THROWS_WITH_AS(SparseGraph::from_edges(3, edges),
                       doctest::Contains("row 1"), input_error);
}

TEST_CASE("from_csr rejects broken invariants") {
  // Asymmetric: (0,1) present, (1,0) missing.
  CHECK_THROWS_AS(SparseGraph::from_csr(2, {0, 1, 1}, {1}, {1.0}), input_error);
  // Unsorted row.
  CHECK_THROWS_AS(SparseGraph::from_csr(3, {0, 2, 3, 4}, {2, 1, 0, 0}, {1, 1, 1, 1}),
                  input_error);
  // Non-positive weight.
  CHECK_THROWS_AS(SparseGraph::from_csr(2, {0, 1, 2}, {1, 0}, {0.0, 0.0}), input_error);
  // Mismatched mirrored weight.
  CHECK_THROWS_AS(SparseGraph::from_csr(2, {0, 1, 2}, {1, 0}, {1.0, 2.0}), input_error);
  // A valid weighted graph passes.
  SparseGraph g = SparseGraph::from_csr(2, {0, 1, 2}, {1, 0}, {0.5, 0.5});
  CHECK(g.edge_weight(0, 1) == 0.5);
}

TEST_CASE("random graphs satisfy the structural invariants") {
  RngStream rng = RngStream::derive(77, 1, 0);
  const NodeId n = 40;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (rng.uniform() < 0.1) edges.emplace_back(i, j);
  SparseGraph g = SparseGraph::from_edges(n, edges);

  double entry_sum = 0.0;
  for (NodeId u = 0; u < n; ++u) {
    auto nbrs = g.neighbors(u);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (k > 0) CHECK(nbrs[k - 1] < nbrs[k]);
      CHECK(g.has_edge(nbrs[k], u));
      CHECK(g.edge_weight(u, nbrs[k]) == g.edge_weight(nbrs[k], u));
    }
    double wd = 0.0;
    for (double w : g.weights(u)) wd += w;
    CHECK(wd == doctest::Approx(g.weighted_degree(u)).epsilon(1e-12));
    entry_sum += wd;
  }
  CHECK(entry_sum == doctest::Approx(g.total_weight()).epsilon(1e-12));
  CHECK(g.total_weight() == doctest::Approx(2.0 * edges.size()));
}

TEST_CASE("classification homophily on a labeled triangle") {
  SparseGraph g = triangle();
  std::vector<int> labels{0, 0, 1};
  CHECK(*node_homophily(g, labels, 0) == doctest::Approx(0.5));
  CHECK(*node_homophily(g, labels, 1) == doctest::Approx(0.5));
  CHECK(*node_homophily(g, labels, 2) == doctest::Approx(0.0));
  CHECK(graph_homophily(g, labels) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("homophily is undefined exactly for nodes without neighbors") {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {3, 3}};
  SparseGraph g = SparseGraph::from_edges(4, edges);
  std::vector<int> labels{0, 0, 1, 1};
  CHECK(node_homophily(g, labels, 0).has_value());
  CHECK_FALSE(node_homophily(g, labels, 2).has_value());
  // A self-loop alone does not create a neighborhood.
  CHECK_FALSE(node_homophily(g, labels, 3).has_value());
  // The graph mean averages only the defined nodes.
  CHECK(graph_homophily(g, labels) == doctest::Approx(1.0));
}

TEST_CASE("missing labels and edgeless graphs are input errors") {
  SparseGraph g = triangle();
  std::vector<int> labels{0, -1, 1};
  CHECK_THROWS_AS(node_homophily(g, labels, 0), input_error);
  SparseGraph empty = SparseGraph::from_edges(3, {});
  std::vector<int> ok{0, 0, 1};
  CHECK_THROWS_AS(graph_homophily(empty, ok), input_error);
}

TEST_CASE("regression homophily normalizes by the largest edge gap") {
  SparseGraph g = triangle();
  std::vector<double> y{0.0, 1.0, 2.0};
  CHECK(max_edge_target_gap(g, y) == doctest::Approx(2.0));
  CHECK(*node_homophily(g, y, 0, 2.0) == doctest::Approx(0.25));
  CHECK(*node_homophily(g, y, 1, 2.0) == doctest::Approx(0.5));
  CHECK(*node_homophily(g, y, 2, 2.0) == doctest::Approx(0.25));
  CHECK(graph_homophily(g, y) == doctest::Approx(1.0 / 3.0));

  // A path puts every neighbor at the maximal gap.
  std::vector<std::pair<NodeId, NodeId>> path_edges{{0, 1}, {1, 2}};
  SparseGraph path = SparseGraph::from_edges(3, path_edges);
  CHECK(*node_homophily(path, y, 1, max_edge_target_gap(path, y)) == doctest::Approx(0.0));

  // Constant targets give perfect alignment by convention.
  std::vector<double> flat{1.0, 1.0, 1.0};
  CHECK(max_edge_target_gap(g, flat) == 0.0);
  CHECK(*node_homophily(g, flat, 0, 0.0) == 1.0);
  CHECK(graph_homophily(g, flat) == doctest::Approx(1.0));
}

TEST_CASE("regression homophily stays within [0,1] on random inputs") {
  RngStream rng = RngStream::derive(31, 4, 0);
  const NodeId n = 30;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (rng.uniform() < 0.15) edges.emplace_back(i, j);
  SparseGraph g = SparseGraph::from_edges(n, edges);
  std::vector<double> y(n);
  for (auto& v : y) v = 10.0 * rng.normal();
  double max_gap = max_edge_target_gap(g, y);
  for (NodeId u = 0; u < n; ++u) {
    auto h = node_homophily(g, y, u, max_gap);
    if (h) {
      CHECK(*h >= 0.0);
      CHECK(*h <= 1.0);
    }
  }
  double hg = graph_homophily(g, y);
  CHECK(hg >= 0.0);
  CHECK(hg <= 1.0);
}

TEST_CASE("clustering coefficient counts closed neighbor pairs") {
  CHECK(clustering_coefficient(triangle(), 0) == doctest::Approx(1.0));

  std::vector<std::pair<NodeId, NodeId>> path_edges{{0, 1}, {1, 2}};
  SparseGraph path = SparseGraph::from_edges(3, path_edges);
  CHECK(clustering_coefficient(path, 1) == 0.0);
  CHECK(clustering_coefficient(path, 0) == 0.0);  // fewer than two neighbors

  // K4 minus edge (2,3): node 0 sees neighbors {1,2,3} with 2 of 3 pairs closed.
  std::vector<std::pair<NodeId, NodeId>> k4{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}};
  SparseGraph g = SparseGraph::from_edges(4, k4);
  CHECK(clustering_coefficient(g, 0) == doctest::Approx(2.0 / 3.0));
}
