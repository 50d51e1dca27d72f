#include "glcp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace glcp {
namespace {

std::string node_str(NodeId u) { return std::to_string(static_cast<unsigned long>(u)); }

}  // namespace

SparseGraph SparseGraph::from_edges(NodeId num_nodes,
                                    std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::pair<NodeId, NodeId>> entries;
  entries.reserve(edges.size() * 2);
  for (std::size_t row = 0; row < edges.size(); ++row) {
    auto [s, d] = edges[row];
    if (s >= num_nodes || d >= num_nodes) {
      throw input_error("edge row " + std::to_string(row) + ": node id " +
                        node_str(s >= num_nodes ? s : d) + " out of range [0, " +
                        node_str(num_nodes) + ")");
    }
    entries.emplace_back(s, d);
    if (s != d) entries.emplace_back(d, s);
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  SparseGraph g;
  g.num_nodes_ = num_nodes;
  g.row_ptr_.assign(num_nodes + 1, 0);
  g.col_idx_.reserve(entries.size());
  g.weights_.assign(entries.size(), 1.0);
  for (const auto& [u, v] : entries) {
    ++g.row_ptr_[u + 1];
    g.col_idx_.push_back(v);
  }
  for (NodeId u = 0; u < num_nodes; ++u) g.row_ptr_[u + 1] += g.row_ptr_[u];
  g.finalize();
  return g;
}

SparseGraph SparseGraph::from_csr(NodeId num_nodes, std::vector<std::size_t> row_ptr,
                                  std::vector<NodeId> col_idx, std::vector<double> weights) {
  if (row_ptr.size() != static_cast<std::size_t>(num_nodes) + 1)
    throw input_error("csr: row_ptr size mismatch");
  if (row_ptr.front() != 0 || row_ptr.back() != col_idx.size())
    throw input_error("csr: row_ptr bounds mismatch");
  if (col_idx.size() != weights.size()) throw input_error("csr: weights size mismatch");

  SparseGraph g;
  g.num_nodes_ = num_nodes;
  g.row_ptr_ = std::move(row_ptr);
  g.col_idx_ = std::move(col_idx);
  g.weights_ = std::move(weights);

  for (NodeId u = 0; u < num_nodes; ++u) {
    if (g.row_ptr_[u] > g.row_ptr_[u + 1]) throw input_error("csr: row_ptr not monotone");
    for (std::size_t k = g.row_ptr_[u]; k < g.row_ptr_[u + 1]; ++k) {
      NodeId v = g.col_idx_[k];
      if (v >= num_nodes)
        throw input_error("csr: node id " + node_str(v) + " out of range");
      if (k > g.row_ptr_[u] && g.col_idx_[k - 1] >= v)
        throw input_error("csr: row " + node_str(u) + " not sorted or has duplicates");
      double w = g.weights_[k];
      if (!std::isfinite(w) || w <= 0.0)
        throw input_error("csr: non-positive or non-finite weight on row " + node_str(u));
    }
  }
  // Symmetry: every (u,v,w) must have a mirrored (v,u) with the identical weight.
  for (NodeId u = 0; u < num_nodes; ++u) {
    for (std::size_t k = g.row_ptr_[u]; k < g.row_ptr_[u + 1]; ++k) {
      NodeId v = g.col_idx_[k];
      if (v == u) continue;
      double mirror = g.edge_weight(v, u);
      if (mirror != g.weights_[k])
        throw input_error("csr: asymmetric entry between " + node_str(u) + " and " +
                          node_str(v));
    }
  }
  g.finalize();
  return g;
}

void SparseGraph::finalize() {
  weighted_degrees_.assign(num_nodes_, 0.0);
  total_weight_ = 0.0;
  for (NodeId u = 0; u < num_nodes_; ++u) {
    double d = 0.0;
    for (std::size_t k = row_ptr_[u]; k < row_ptr_[u + 1]; ++k) d += weights_[k];
    weighted_degrees_[u] = d;
    total_weight_ += d;
  }
}

bool SparseGraph::has_edge(NodeId u, NodeId v) const {
  auto row = neighbors(u);
  return std::binary_search(row.begin(), row.end(), v);
}

double SparseGraph::edge_weight(NodeId u, NodeId v) const {
  auto row = neighbors(u);
  auto it = std::lower_bound(row.begin(), row.end(), v);
  if (it == row.end() || *it != v) return 0.0;
  return weights(u)[static_cast<std::size_t>(it - row.begin())];
}

std::optional<double> node_homophily(const SparseGraph& g, std::span<const int> labels,
                                     NodeId u) {
  if (labels.size() != g.num_nodes()) throw input_error("homophily: label table size mismatch");
  if (labels[u] < 0) throw input_error("homophily: node " + node_str(u) + " has no label");
  std::size_t total = 0, same = 0;
  for (NodeId v : g.neighbors(u)) {
    if (v == u) continue;
    if (labels[v] < 0) throw input_error("homophily: node " + node_str(v) + " has no label");
    ++total;
    if (labels[v] == labels[u]) ++same;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(same) / static_cast<double>(total);
}

double max_edge_target_gap(const SparseGraph& g, std::span<const double> targets) {
  if (targets.size() != g.num_nodes()) throw input_error("homophily: target table size mismatch");
  double max_gap = 0.0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (!std::isfinite(targets[u])) throw input_error("homophily: non-finite target");
    for (NodeId v : g.neighbors(u)) {
      if (v == u) continue;
      max_gap = std::max(max_gap, std::abs(targets[v] - targets[u]));
    }
  }
  return max_gap;
}

std::optional<double> node_homophily(const SparseGraph& g, std::span<const double> targets,
                                     NodeId u, double max_gap) {
  if (targets.size() != g.num_nodes()) throw input_error("homophily: target table size mismatch");
  std::size_t total = 0;
  double gap_sum = 0.0;
  for (NodeId v : g.neighbors(u)) {
    if (v == u) continue;
    ++total;
    gap_sum += std::abs(targets[v] - targets[u]);
  }
  if (total == 0) return std::nullopt;
  if (max_gap == 0.0) return 1.0;
  return 1.0 - gap_sum / (static_cast<double>(total) * max_gap);
}

namespace {

template <typename NodeFn>
double mean_defined_homophily(const SparseGraph& g, NodeFn&& per_node) {
  double sum = 0.0;
  std::size_t count = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (auto h = per_node(u)) {
      sum += *h;
      ++count;
    }
  }
  if (count == 0) throw input_error("graph homophily undefined: graph has no edges");
  return sum / static_cast<double>(count);
}

}  // namespace

double graph_homophily(const SparseGraph& g, std::span<const int> labels) {
  return mean_defined_homophily(g, [&](NodeId u) { return node_homophily(g, labels, u); });
}

double graph_homophily(const SparseGraph& g, std::span<const double> targets) {
  double max_gap = max_edge_target_gap(g, targets);
  return mean_defined_homophily(
      g, [&](NodeId u) { return node_homophily(g, targets, u, max_gap); });
}

double clustering_coefficient(const SparseGraph& g, NodeId u) {
  std::vector<NodeId> nbrs;
  for (NodeId v : g.neighbors(u))
    if (v != u) nbrs.push_back(v);
  std::size_t k = nbrs.size();
  if (k < 2) return 0.0;
  std::size_t links = 0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      if (g.has_edge(nbrs[a], nbrs[b])) ++links;
  return 2.0 * static_cast<double>(links) /
         (static_cast<double>(k) * static_cast<double>(k - 1));
}

}  // namespace glcp
