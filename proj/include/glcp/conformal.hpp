#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "glcp/kernel.hpp"
#include "glcp/node_table.hpp"
#include "glcp/ppr.hpp"
#include "glcp/types.hpp"

namespace glcp {

/// Nonconformity score families. abs_residual applies to regression;
/// aps (cumulative mass of classes at least as probable as the label, ties
/// broken by strict inequality) and thr (one minus the label probability)
/// apply to classification.
enum class ScoreKind { abs_residual, aps, thr };

const char* to_string(ScoreKind k);

double regression_score(double y_hat, double y);
double classification_score(ScoreKind kind, std::span<const double> probs, int label);

/// Calibration scores pinned to sorted node ids. Sorting here is what makes
/// every downstream predictor invariant to the caller's calibration order.
struct CalibrationProfile {
  TaskKind task = TaskKind::regression;
  ScoreKind score_kind = ScoreKind::abs_residual;
  std::vector<NodeId> ids;     // ascending
  std::vector<double> scores;  // aligned with ids

  static CalibrationProfile build(const NodeTable& table, std::span<const NodeId> calib_ids,
                                  ScoreKind kind);
};

/// Level-(1-alpha) quantile of the weighted score distribution with a point
/// mass of test_weight at +infinity. Weights plus test_weight must sum to one
/// within 1e-9. Equal scores merge their weight before the threshold test;
/// the cumulative comparison carries a 1e-12 slack, and +infinity is returned
/// when no finite atom reaches the level.
double weighted_quantile(std::span<const double> scores, std::span<const double> weights,
                         double test_weight, double alpha);

/// Split-conformal quantile: uniform weights 1/(n+1) with the +infinity atom.
double scp_quantile(const CalibrationProfile& prof, double alpha);

/// One prediction set. Regression carries an interval; classification carries
/// a sorted label set. The quantile may be +infinity, which yields an
/// unbounded interval or the full label set.
struct PredictionOutput {
  NodeId node_id = 0;
  double quantile = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<int> label_set;

  double set_size(TaskKind task) const {
    return task == TaskKind::regression ? upper - lower
                                        : static_cast<double>(label_set.size());
  }
};

/// Localization weights recorded during prediction, one slot per test node,
/// for coverage diagnostics. calib_weights rows align with the profile's
/// sorted calibration ids.
struct WeightTrace {
  std::vector<double> test_weights;
  std::vector<std::vector<double>> calib_weights;
};

std::vector<PredictionOutput> predict_scp(const CalibrationProfile& prof,
                                          const NodeTable& table,
                                          std::span<const NodeId> test_ids, double alpha,
                                          WeightTrace* trace = nullptr);

/// Localized conformal prediction with a Gaussian localizer on raw embeddings.
/// Each test node draws an anchor at bandwidth-scaled distance from its own
/// embedding; weights are the normalized anchor densities over calibration
/// nodes plus the test node.
std::vector<PredictionOutput> predict_rlcp(const CalibrationProfile& prof,
                                           const NodeTable& table,
                                           std::span<const NodeId> test_ids, double h,
                                           double alpha, std::uint64_t seed,
                                           int num_threads = 1, WeightTrace* trace = nullptr);

enum class GraphLcpVariant { ppr, gss };

GraphLcpVariant parse_graphlcp_variant(const std::string& token);
const char* to_string(GraphLcpVariant v);

struct GraphLcpParams {
  GraphLcpVariant variant = GraphLcpVariant::ppr;
  double beta = 0.3;    // walk restart probability, in (0,1]
  int truncation = 30;  // walk length cap
  double alpha = 0.1;
  std::uint64_t seed = 0;
};

/// Structure-aware localized prediction on the densified graph.
///   - ppr: anchor sampled by a truncated random walk from the test node;
///     weights are degree-corrected truncated walk mass at the anchor.
///   - gss: anchor sampled in the principal subspace around the test node's
///     projection; weights are normalized anisotropic kernel values. Needs
///     projected rows and the kernel; the walk view is still used for ids.
std::vector<PredictionOutput> predict_graphlcp(const CalibrationProfile& prof,
                                               const NodeTable& table,
                                               const TransitionView& walk,
                                               const Eigen::MatrixXd* projected,
                                               const AnisotropicKernel* kernel,
                                               std::span<const NodeId> test_ids,
                                               const GraphLcpParams& params,
                                               int num_threads = 1,
                                               WeightTrace* trace = nullptr);

}  // namespace glcp
