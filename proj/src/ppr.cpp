#include "glcp/ppr.hpp"

#include <algorithm>
#include <cmath>

namespace glcp {

TransitionView::TransitionView(const SparseGraph& g) : g_(&g) {
  row_offset_.reserve(g.num_nodes() + 1);
  row_cum_.reserve(g.num_entries());
  row_offset_.push_back(0);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    double cum = 0.0;
    for (double w : g.weights(u)) {
      cum += w;
      row_cum_.push_back(cum);
    }
    row_offset_.push_back(row_cum_.size());
  }
}

void TransitionView::apply(std::span<const double> in, std::span<double> out) const {
  const NodeId n = num_nodes();
  if (in.size() != n || out.size() != n) throw input_error("transition: vector size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (NodeId u = 0; u < n; ++u) {
    double m = in[u];
    if (m == 0.0) continue;
    double d = g_->weighted_degree(u);
    if (d <= 0.0) {
      out[u] += m;
      continue;
    }
    double f = m / d;
    auto nbrs = g_->neighbors(u);
    auto ws = g_->weights(u);
    for (std::size_t k = 0; k < nbrs.size(); ++k) out[nbrs[k]] += f * ws[k];
  }
}

NodeId TransitionView::step(NodeId u, RngStream& rng) const {
  double d = g_->weighted_degree(u);
  if (d <= 0.0) return u;
  auto nbrs = g_->neighbors(u);
  const double* cum_begin = row_cum_.data() + row_offset_[u];
  double r = rng.uniform() * d;
  std::size_t idx = static_cast<std::size_t>(
      std::upper_bound(cum_begin, cum_begin + nbrs.size(), r) - cum_begin);
  if (idx >= nbrs.size()) idx = nbrs.size() - 1;
  return nbrs[idx];
}

PprVector ppr_power_iteration(const TransitionView& t, NodeId seed, double beta, int K) {
  const NodeId n = t.num_nodes();
  if (seed >= n) throw input_error("ppr: seed out of range");
  if (!(beta > 0.0 && beta <= 1.0)) throw param_error("ppr: beta must lie in (0,1]");
  if (K < 0) throw param_error("ppr: truncation must be non-negative");

  PprVector out;
  out.seed = seed;
  out.beta = beta;
  out.truncation = K;
  out.mass.assign(n, 0.0);

  std::vector<double> walk(n, 0.0), next(n, 0.0);
  walk[seed] = 1.0;
  double coef = beta;
  out.mass[seed] = coef;
  for (int k = 1; k <= K; ++k) {
    t.apply(walk, next);
    std::swap(walk, next);
    coef *= 1.0 - beta;
    if (coef == 0.0) break;
    for (NodeId u = 0; u < n; ++u)
      if (walk[u] != 0.0) out.mass[u] += coef * walk[u];
  }
  return out;
}

std::uint64_t sample_walk_length(double beta, int K, RngStream& rng) {
  if (!(beta > 0.0 && beta <= 1.0)) throw param_error("ppr: beta must lie in (0,1]");
  if (K < 0) throw param_error("ppr: truncation must be non-negative");
  // Rejected draws are resampled, which conditions the geometric law on {0..K}.
  for (;;) {
    std::uint64_t k = rng.geometric(beta);
    if (k <= static_cast<std::uint64_t>(K)) return k;
  }
}

NodeId sample_anchor(const TransitionView& t, NodeId origin, double beta, int K,
                     RngStream& rng) {
  if (origin >= t.num_nodes()) throw input_error("ppr: origin out of range");
  std::uint64_t len = sample_walk_length(beta, K, rng);
  NodeId u = origin;
  for (std::uint64_t i = 0; i < len; ++i) u = t.step(u, rng);
  return u;
}

WeightVector structural_weights(const TransitionView& t, const PprVector& anchor_mass,
                                std::span<const NodeId> calib_ids, NodeId test_id) {
  const NodeId n = t.num_nodes();
  if (anchor_mass.mass.size() != n) throw input_error("weights: mass vector size mismatch");
  if (test_id >= n) throw input_error("weights: test id out of range");

  WeightVector out;
  out.ids.assign(calib_ids.begin(), calib_ids.end());
  out.ids.push_back(test_id);
  std::vector<double> raw(out.ids.size());
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    NodeId id = out.ids[i];
    if (id >= n) throw input_error("weights: calibration id out of range");
    raw[i] = anchor_mass.mass[id] / t.effective_degree(id);
  }

  // Sum in id order so the normalizer, and hence every weight, is invariant
  // to the caller's calibration ordering.
  std::vector<std::size_t> order(out.ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return out.ids[a] < out.ids[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (out.ids[order[i]] == out.ids[order[i - 1]])
      throw input_error("weights: duplicate node id in candidate set");
  double denom = 0.0;
  for (std::size_t i : order) denom += raw[i];

  out.weights.resize(raw.size());
  if (denom <= 0.0) {
    std::fill(out.weights.begin(), out.weights.end(), 0.0);
    out.weights.back() = 1.0;
    return out;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) out.weights[i] = raw[i] / denom;
  return out;
}

WeightVector structural_weights(const TransitionView& t, NodeId anchor,
                                std::span<const NodeId> calib_ids, NodeId test_id,
                                double beta, int K) {
  PprVector mass = ppr_power_iteration(t, anchor, beta, K);
  return structural_weights(t, mass, calib_ids, test_id);
}

}  // namespace glcp
