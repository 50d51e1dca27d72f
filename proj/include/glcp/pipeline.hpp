#pragma once

#include <optional>
#include <span>

#include "glcp/conformal.hpp"
#include "glcp/densify.hpp"
#include "glcp/io.hpp"
#include "glcp/metrics.hpp"
#include "glcp/pca.hpp"

namespace glcp {

/// Shared subspace stage for structure-aware runs: graph homophily, principal
/// subspace of the calibration embeddings, projections of every node, and the
/// anisotropic kernel at the configured bandwidth. The retained dimension is
/// clamped to what the calibration set supports.
struct SubspaceContext {
  double homophily = 0.0;
  PcaModel pca;
  Eigen::MatrixXd projected;  // all nodes, row = node
  AnisotropicKernel kernel;
  int effective_dim = 0;
};

SubspaceContext build_subspace(const Bundle& bundle, const RunConfig& cfg);

struct MetricsBlock {
  MarginalMetrics marginal;
  WscResult wsc;
  GroupCoverage by_homophily;
  GroupCoverage by_degree;
  GroupCoverage by_clustering;
  GroupCoverage by_cluster;
};

/// Conditional-coverage suite over the test nodes. Node statistics always come
/// from the original graph; the slab and cluster metrics run in the space
/// selected by wsc_space (projected rows required for "pca").
MetricsBlock assemble_metrics(const Bundle& bundle, std::span<const NodeId> test_ids,
                              std::span<const PredictionOutput> outputs,
                              const RunConfig& cfg, const Eigen::MatrixXd* projected);

struct PipelineResult {
  RunConfig config;
  TaskKind task = TaskKind::regression;
  ScoreKind score_kind = ScoreKind::abs_residual;
  std::optional<double> homophily;         // graphlcp only
  int effective_pca_dim = 0;               // 0 when no subspace stage ran
  std::optional<PcaModel> pca;
  std::optional<DensifyResult> densify_result;
  std::vector<NodeId> test_ids;
  std::vector<PredictionOutput> outputs;
  std::vector<char> covered;
  std::optional<MetricsBlock> metrics;  // absent when the test split is empty
  WeightTrace trace;
};

PipelineResult run_pipeline(const Bundle& bundle, const RunConfig& cfg, int num_threads = 1);

/// Full deterministic run report; serialize with dump_json.
nlohmann::ordered_json report_to_json(const Bundle& bundle, const PipelineResult& result);

nlohmann::ordered_json metrics_to_json(const MetricsBlock& metrics);

}  // namespace glcp
