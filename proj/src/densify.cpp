#include "glcp/densify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "glcp/parallel.hpp"

namespace glcp {

DensifyBounds densification_bounds(double homophily, double tau0) {
  if (!(homophily >= 0.0 && homophily <= 1.0))
    throw param_error("densify: homophily must lie in [0,1]");
  if (!(tau0 > 0.0 && tau0 < 1.0)) throw param_error("densify: tau0 must lie in (0,1)");
  DensifyBounds b;
  b.lower = 1.0 + std::min(homophily, (1.0 - tau0) * 2.0);
  b.upper = homophily < 1.0 ? 1.0 / (1.0 - homophily)
                            : std::numeric_limits<double>::infinity();
  return b;
}

std::pair<SparseGraph, std::size_t> augment_edges(const SparseGraph& g,
                                                  const Eigen::MatrixXd& z,
                                                  const AnisotropicKernel& kernel,
                                                  double tau, int num_threads) {
  const NodeId n = g.num_nodes();
  if (z.rows() != static_cast<Eigen::Index>(n)) throw input_error("densify: embedding row count mismatch");
  if (z.cols() != kernel.dim()) throw input_error("densify: embedding dimension mismatch");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw param_error("densify: threshold must be positive");
  if (!z.allFinite()) throw input_error("densify: non-finite embedding entry");

  const Eigen::VectorXd& scale = kernel.scale();
  const int dim = kernel.dim();
  // Pairs with kernel >= tau satisfy sq_distance <= bound; the margin lets the
  // scan reject clearly-over pairs early while the boundary decision always
  // falls to the exact kernel value.
  const double bound = -2.0 * std::log(tau);
  const double margin = 1e-12 * (1.0 + std::abs(bound));

  // added[i] holds (j, weight) for accepted pairs with j > i.
  std::vector<std::vector<std::pair<NodeId, double>>> added(n);
  parallel_for(n, num_threads, [&](std::size_t row) {
    const NodeId i = static_cast<NodeId>(row);
    auto nbrs = g.neighbors(i);
    std::size_t p = static_cast<std::size_t>(
        std::upper_bound(nbrs.begin(), nbrs.end(), i) - nbrs.begin());
    for (NodeId j = i + 1; j < n; ++j) {
      if (p < nbrs.size() && nbrs[p] == j) {
        ++p;
        continue;
      }
      double acc = 0.0;
      bool over = false;
      for (int k = 0; k < dim; ++k) {
        double dz = z(i, k) - z(j, k);
        acc += dz * dz / scale(k);
        if (acc > bound + margin) {
          over = true;
          break;
        }
      }
      if (over) continue;
      double w = std::exp(-0.5 * acc);
      if (w >= tau) added[row].emplace_back(j, w);
    }
  });

  // Scatter the accepted pairs into per-row fragments. Iterating i ascending
  // keeps both fragments sorted without an extra sort.
  std::vector<std::vector<std::pair<NodeId, double>>> low(n);
  std::size_t pairs = 0;
  for (NodeId i = 0; i < n; ++i) {
    pairs += added[i].size();
    for (const auto& [j, w] : added[i]) low[j].emplace_back(i, w);
  }

  std::vector<std::size_t> row_ptr(n + 1, 0);
  for (NodeId u = 0; u < n; ++u)
    row_ptr[u + 1] = row_ptr[u] + g.degree(u) + low[u].size() + added[u].size();
  std::vector<NodeId> col_idx(row_ptr[n]);
  std::vector<double> weights(row_ptr[n]);
  for (NodeId u = 0; u < n; ++u) {
    auto orig_n = g.neighbors(u);
    auto orig_w = g.weights(u);
    std::size_t out = row_ptr[u];
    std::size_t a = 0, b = 0, c = 0;
    // Three-way merge; key ranges of low (< u) and added (> u) never overlap
    // the original row's duplicates because augment only visits non-adjacent pairs.
    while (a < orig_n.size() || b < low[u].size() || c < added[u].size()) {
      NodeId ka = a < orig_n.size() ? orig_n[a] : std::numeric_limits<NodeId>::max();
      NodeId kb = b < low[u].size() ? low[u][b].first : std::numeric_limits<NodeId>::max();
      NodeId kc = c < added[u].size() ? added[u][c].first : std::numeric_limits<NodeId>::max();
      if (ka <= kb && ka <= kc) {
        col_idx[out] = ka;
        weights[out] = orig_w[a];
        ++a;
      } else if (kb <= kc) {
        col_idx[out] = kb;
        weights[out] = low[u][b].second;
        ++b;
      } else {
        col_idx[out] = kc;
        weights[out] = added[u][c].second;
        ++c;
      }
      ++out;
    }
  }
  return {SparseGraph::from_csr(n, std::move(row_ptr), std::move(col_idx), std::move(weights)),
          pairs};
}

DensifyResult densify(const SparseGraph& g, const Eigen::MatrixXd& z,
                      const AnisotropicKernel& kernel, double homophily,
                      const DensifyConfig& cfg, int num_threads) {
  if (cfg.max_iters < 1) throw param_error("densify: pass budget must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw param_error("densify: gamma must lie in (0,1)");
  if (g.total_weight() <= 0.0)
    throw input_error("densify: cannot calibrate the threshold on an edgeless graph");

  DensifyResult result;
  result.bounds = densification_bounds(homophily, cfg.tau0);
  double tau = cfg.tau0;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    auto [aug, pairs] = augment_edges(g, z, kernel, tau, num_threads);
    double rho = aug.total_weight() / g.total_weight();
    result.graph = std::move(aug);
    result.tau = tau;
    result.edge_ratio = rho;
    result.iterations = t;
    result.edges_added = pairs;
    if (rho >= result.bounds.lower && rho <= result.bounds.upper) {
      result.converged = true;
      return result;
    }
    // Each pass re-densifies from the original graph with the nudged threshold.
    tau = rho <= result.bounds.lower ? (1.0 - cfg.gamma) * tau : (1.0 + cfg.gamma) * tau;
  }
  result.converged = false;
  return result;
}

}  // namespace glcp
