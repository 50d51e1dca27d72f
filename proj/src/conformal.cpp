#include "glcp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "glcp/parallel.hpp"

namespace glcp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCumSlack = 1e-12;  // cumulative-weight comparison slack
constexpr double kSumTol = 1e-9;     // weight normalization tolerance

std::vector<double> prob_row(const NodeTable& table, NodeId id) {
  std::vector<double> row(table.num_classes);
  for (int c = 0; c < table.num_classes; ++c)
    row[c] = table.class_probs(static_cast<Eigen::Index>(id), c);
  return row;
}

void validate_probs(std::span<const double> probs, int label) {
  if (probs.empty()) throw input_error("score: empty probability row");
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
    throw input_error("score: label out of range");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw input_error("score: invalid probability entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw input_error("score: probability row does not sum to one");
}

void check_test_id(const CalibrationProfile& prof, const NodeTable& table, NodeId id) {
  if (id >= table.num_nodes()) throw input_error("predict: test id out of range");
  if (std::binary_search(prof.ids.begin(), prof.ids.end(), id))
    throw input_error("predict: test id also appears in the calibration set");
}

PredictionOutput make_output(const CalibrationProfile& prof, const NodeTable& table,
                             NodeId id, double q) {
  PredictionOutput out;
  out.node_id = id;
  out.quantile = q;
  if (table.task == TaskKind::regression) {
    out.lower = table.y_hat[id] - q;
    out.upper = table.y_hat[id] + q;
  } else {
    auto row = prob_row(table, id);
    for (int c = 0; c < table.num_classes; ++c)
      if (classification_score(prof.score_kind, row, c) <= q) out.label_set.push_back(c);
  }
  return out;
}

/// Normalizes exp(log value) over calibration entries plus the test entry.
/// Subtracting the max exponent keeps the largest term at 1, so the sum never
/// vanishes and extreme bandwidths stay well defined.
std::pair<std::vector<double>, double> softmax_weights(std::span<const double> calib_log,
                                                       double test_log) {
  double m = test_log;
  for (double v : calib_log) m = std::max(m, v);
  std::vector<double> w(calib_log.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < calib_log.size(); ++i) {
    w[i] = std::exp(calib_log[i] - m);
    denom += w[i];
  }
  double tw = std::exp(test_log - m);
  denom += tw;
  for (double& x : w) x /= denom;
  return {std::move(w), tw / denom};
}

void record_trace(WeightTrace* trace, std::size_t slot, std::vector<double> calib_w,
                  double test_w) {
  if (!trace) return;
  trace->calib_weights[slot] = std::move(calib_w);
  trace->test_weights[slot] = test_w;
}

void init_trace(WeightTrace* trace, std::size_t count) {
  if (!trace) return;
  trace->test_weights.assign(count, 0.0);
  trace->calib_weights.assign(count, {});
}

}  // namespace

const char* to_string(ScoreKind k) {
  switch (k) {
    case ScoreKind::abs_residual: return "abs_residual";
    case ScoreKind::aps: return "aps";
    case ScoreKind::thr: return "thr";
  }
  throw param_error("unknown score kind");
}

double regression_score(double y_hat, double y) {
  if (!std::isfinite(y_hat) || !std::isfinite(y))
    throw input_error("score: non-finite regression input");
  return std::abs(y - y_hat);
}

double classification_score(ScoreKind kind, std::span<const double> probs, int label) {
  validate_probs(probs, label);
  double p_y = probs[static_cast<std::size_t>(label)];
  if (kind == ScoreKind::thr) return 1.0 - p_y;
  if (kind != ScoreKind::aps) throw param_error("score: kind does not apply to classification");
  double s = p_y;
  for (std::size_t c = 0; c < probs.size(); ++c)
    if (probs[c] > p_y) s += probs[c];
  return s;
}

CalibrationProfile CalibrationProfile::build(const NodeTable& table,
                                             std::span<const NodeId> calib_ids,
                                             ScoreKind kind) {
  bool regression = table.task == TaskKind::regression;
  if (regression != (kind == ScoreKind::abs_residual))
    throw param_error("profile: score kind does not match the task");

  CalibrationProfile prof;
  prof.task = table.task;
  prof.score_kind = kind;
  prof.ids.assign(calib_ids.begin(), calib_ids.end());
  std::sort(prof.ids.begin(), prof.ids.end());
  for (std::size_t i = 0; i < prof.ids.size(); ++i) {
    if (prof.ids[i] >= table.num_nodes()) throw input_error("profile: calibration id out of range");
    if (i > 0 && prof.ids[i] == prof.ids[i - 1])
      throw input_error("profile: duplicate calibration id");
  }

  prof.scores.reserve(prof.ids.size());
  for (NodeId id : prof.ids) {
    if (regression) {
      prof.scores.push_back(regression_score(table.y_hat[id], table.targets[id]));
    } else {
      auto row = prob_row(table, id);
      prof.scores.push_back(classification_score(kind, row, table.labels[id]));
    }
  }
  return prof;
}

double weighted_quantile(std::span<const double> scores, std::span<const double> weights,
                         double test_weight, double alpha) {
  if (scores.size() != weights.size()) throw input_error("quantile: score/weight size mismatch");
  if (!(alpha > 0.0 && alpha < 1.0)) throw param_error("quantile: alpha must lie in (0,1)");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(scores[i])) throw input_error("quantile: non-finite score");
    if (!std::isfinite(weights[i]) || weights[i] < 0.0)
      throw input_error("quantile: negative or non-finite weight");
    total += weights[i];
  }
  if (!std::isfinite(test_weight) || test_weight < 0.0)
    throw input_error("quantile: negative or non-finite test weight");
  total += test_weight;
  if (std::abs(total - 1.0) > kSumTol)
    throw input_error("quantile: weights must sum to one");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  const double level = 1.0 - alpha;
  double cum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Equal scores pool their weight before the level test.
    std::size_t j = i;
    double group = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group += weights[order[j]];
      ++j;
    }
    cum += group;
    if (cum >= level - kCumSlack) return scores[order[i]];
    i = j;
  }
  return kInf;  // the +infinity atom absorbs the remaining mass
}

double scp_quantile(const CalibrationProfile& prof, double alpha) {
  const std::size_t n = prof.scores.size();
  if (n == 0) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw param_error("quantile: alpha must lie in (0,1)");
    return kInf;
  }
  std::vector<double> uniform(n, 1.0 / static_cast<double>(n + 1));
  return weighted_quantile(prof.scores, uniform, 1.0 / static_cast<double>(n + 1), alpha);
}

std::vector<PredictionOutput> predict_scp(const CalibrationProfile& prof,
                                          const NodeTable& table,
                                          std::span<const NodeId> test_ids, double alpha,
                                          WeightTrace* trace) {
  double q = scp_quantile(prof, alpha);
  init_trace(trace, test_ids.size());
  std::vector<PredictionOutput> out(test_ids.size());
  double u = 1.0 / static_cast<double>(prof.scores.size() + 1);
  for (std::size_t i = 0; i < test_ids.size(); ++i) {
    check_test_id(prof, table, test_ids[i]);
    out[i] = make_output(prof, table, test_ids[i], q);
    record_trace(trace, i, std::vector<double>(prof.scores.size(), u), u);
  }
  return out;
}

std::vector<PredictionOutput> predict_rlcp(const CalibrationProfile& prof,
                                           const NodeTable& table,
                                           std::span<const NodeId> test_ids, double h,
                                           double alpha, std::uint64_t seed,
                                           int num_threads, WeightTrace* trace) {
  if (!(h > 0.0) || !std::isfinite(h)) throw param_error("rlcp: bandwidth must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw param_error("rlcp: alpha must lie in (0,1)");
  const Eigen::Index d = table.embeddings.cols();
  init_trace(trace, test_ids.size());
  std::vector<PredictionOutput> out(test_ids.size());
  parallel_for(test_ids.size(), num_threads, [&](std::size_t i) {
    NodeId id = test_ids[i];
    check_test_id(prof, table, id);
    RngStream rng = RngStream::derive(seed, streams::kRlcpAnchor, id);
    Eigen::VectorXd anchor(d);
    for (Eigen::Index k = 0; k < d; ++k)
      anchor(k) = table.embeddings(static_cast<Eigen::Index>(id), k) + h * rng.normal();
    std::vector<double> calib_log(prof.ids.size());
    for (std::size_t j = 0; j < prof.ids.size(); ++j)
      calib_log[j] = isotropic_log_kernel(
          h, table.embeddings.row(static_cast<Eigen::Index>(prof.ids[j])).transpose(),
          anchor);
    double test_log = isotropic_log_kernel(
        h, table.embeddings.row(static_cast<Eigen::Index>(id)).transpose(), anchor);
    auto [w, tw] = softmax_weights(calib_log, test_log);
    double q = weighted_quantile(prof.scores, w, tw, alpha);
    out[i] = make_output(prof, table, id, q);
    record_trace(trace, i, std::move(w), tw);
  });
  return out;
}

GraphLcpVariant parse_graphlcp_variant(const std::string& token) {
  if (token == "ppr") return GraphLcpVariant::ppr;
  if (token == "gss") return GraphLcpVariant::gss;
  throw param_error("unknown localization variant: " + token);
}

const char* to_string(GraphLcpVariant v) {
  return v == GraphLcpVariant::ppr ? "ppr" : "gss";
}

std::vector<PredictionOutput> predict_graphlcp(const CalibrationProfile& prof,
                                               const NodeTable& table,
                                               const TransitionView& walk,
                                               const Eigen::MatrixXd* projected,
                                               const AnisotropicKernel* kernel,
                                               std::span<const NodeId> test_ids,
                                               const GraphLcpParams& params,
                                               int num_threads, WeightTrace* trace) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0))
    throw param_error("graphlcp: alpha must lie in (0,1)");
  if (walk.num_nodes() != table.num_nodes())
    throw input_error("graphlcp: graph and table disagree on node count");
  init_trace(trace, test_ids.size());
  std::vector<PredictionOutput> out(test_ids.size());

  if (params.variant == GraphLcpVariant::gss) {
    if (!projected || !kernel)
      throw param_error("graphlcp: gss variant needs projected rows and a kernel");
    if (projected->rows() != static_cast<Eigen::Index>(table.num_nodes()) ||
        projected->cols() != kernel->dim())
      throw input_error("graphlcp: projected row shape mismatch");
    parallel_for(test_ids.size(), num_threads, [&](std::size_t i) {
      NodeId id = test_ids[i];
      check_test_id(prof, table, id);
      RngStream rng = RngStream::derive(params.seed, streams::kGssAnchor, id);
      Eigen::VectorXd anchor =
          projected->row(static_cast<Eigen::Index>(id)).transpose() +
          kernel->sample_offset(rng);
      std::vector<double> calib_log(prof.ids.size());
      for (std::size_t j = 0; j < prof.ids.size(); ++j)
        calib_log[j] = kernel->log_value(
            projected->row(static_cast<Eigen::Index>(prof.ids[j])).transpose(), anchor);
      double test_log =
          kernel->log_value(projected->row(static_cast<Eigen::Index>(id)).transpose(), anchor);
      auto [w, tw] = softmax_weights(calib_log, test_log);
      double q = weighted_quantile(prof.scores, w, tw, params.alpha);
      out[i] = make_output(prof, table, id, q);
      record_trace(trace, i, std::move(w), tw);
    });
    return out;
  }

  // Walk variant. Anchors are sampled per test node from per-node streams,
  // then mass vectors are computed once per distinct anchor.
  std::vector<NodeId> anchors(test_ids.size());
  parallel_for(test_ids.size(), num_threads, [&](std::size_t i) {
    NodeId id = test_ids[i];
    check_test_id(prof, table, id);
    RngStream rng = RngStream::derive(params.seed, streams::kAnchorWalk, id);
    anchors[i] = sample_anchor(walk, id, params.beta, params.truncation, rng);
  });

  std::vector<NodeId> unique_anchors(anchors);
  std::sort(unique_anchors.begin(), unique_anchors.end());
  unique_anchors.erase(std::unique(unique_anchors.begin(), unique_anchors.end()),
                       unique_anchors.end());
  std::vector<PprVector> masses(unique_anchors.size());
  parallel_for(unique_anchors.size(), num_threads, [&](std::size_t a) {
    masses[a] = ppr_power_iteration(walk, unique_anchors[a], params.beta, params.truncation);
  });

  parallel_for(test_ids.size(), num_threads, [&](std::size_t i) {
    NodeId id = test_ids[i];
    std::size_t a = static_cast<std::size_t>(
        std::lower_bound(unique_anchors.begin(), unique_anchors.end(), anchors[i]) -
        unique_anchors.begin());
    WeightVector wv = structural_weights(walk, masses[a], prof.ids, id);
    std::span<const double> calib_w(wv.weights.data(), wv.weights.size() - 1);
    double q = weighted_quantile(prof.scores, calib_w, wv.test_weight(), params.alpha);
    out[i] = make_output(prof, table, id, q);
    record_trace(trace, i,
                 std::vector<double>(calib_w.begin(), calib_w.end()), wv.test_weight());
  });
  return out;
}

}  // namespace glcp
