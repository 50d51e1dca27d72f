#include "glcp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glcp/graph.hpp"

namespace glcp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const NodeId> ids) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), m.cols());
  for (std::size_t i = 0; i < ids.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(ids[i]));
  return out;
}

double compute_homophily(const Bundle& bundle) {
  return bundle.table.task == TaskKind::regression
             ? graph_homophily(bundle.graph, bundle.table.targets)
             : graph_homophily(bundle.graph, bundle.table.labels);
}

}  // namespace

SubspaceContext build_subspace(const Bundle& bundle, const RunConfig& cfg) {
  const NodeTable& table = bundle.table;
  auto calib = table.ids_in_split(Split::calib);
  if (calib.size() < 2)
    throw input_error("subspace: need at least two calibration nodes to fit the projection");
  const int d = static_cast<int>(table.embeddings.cols());
  int c_eff = std::min({cfg.pca_dim, static_cast<int>(calib.size()) - 1, d});

  double homophily = compute_homophily(bundle);
  PcaModel pca = fit_pca(gather_rows(table.embeddings, calib), c_eff);
  Eigen::MatrixXd projected = pca_project_rows(pca, table.embeddings);
  AnisotropicKernel kernel(cfg.bandwidth, pca.eigenvalues);
  return SubspaceContext{homophily, std::move(pca), std::move(projected), std::move(kernel),
                         c_eff};
}

MetricsBlock assemble_metrics(const Bundle& bundle, std::span<const NodeId> test_ids,
                              std::span<const PredictionOutput> outputs,
                              const RunConfig& cfg, const Eigen::MatrixXd* projected) {
  if (test_ids.size() != outputs.size()) throw input_error("metrics: id/output size mismatch");
  const NodeTable& table = bundle.table;
  const SparseGraph& graph = bundle.graph;

  MetricsBlock block;
  block.marginal = marginal_metrics(table, outputs);
  auto covered = coverage_flags(table, outputs);

  Eigen::MatrixXd points;
  if (cfg.wsc_space == "pca") {
    if (!projected) throw param_error("metrics: wsc_space pca needs projected rows");
    points = gather_rows(*projected, test_ids);
  } else {
    points = gather_rows(table.embeddings, test_ids);
  }
  block.wsc = worst_slab_coverage(points, covered, cfg.num_directions, cfg.delta_wsc, cfg.seed);

  std::vector<double> homophily_feature(test_ids.size(), kNaN);
  std::vector<double> degree_feature(test_ids.size(), 0.0);
  std::vector<double> clustering_feature(test_ids.size(), 0.0);
  double max_gap = table.task == TaskKind::regression
                       ? max_edge_target_gap(graph, table.targets)
                       : 0.0;
  for (std::size_t i = 0; i < test_ids.size(); ++i) {
    NodeId u = test_ids[i];
    std::optional<double> h =
        table.task == TaskKind::regression
            ? node_homophily(graph, table.targets, u, max_gap)
            : node_homophily(graph, table.labels, u);
    if (h) homophily_feature[i] = *h;
    degree_feature[i] = static_cast<double>(graph.degree(u));
    clustering_feature[i] = clustering_coefficient(graph, u);
  }

  block.by_homophily = tercile_coverage(homophily_feature, covered);
  block.by_degree = tercile_coverage(degree_feature, covered);
  block.by_clustering = tercile_coverage(clustering_feature, covered);
  block.by_cluster = kmeans_coverage(points, covered);
  return block;
}

PipelineResult run_pipeline(const Bundle& bundle, const RunConfig& cfg, int num_threads) {
  cfg.validate();
  bundle.table.validate();
  if (bundle.graph.num_nodes() != bundle.table.num_nodes())
    throw input_error("pipeline: graph and table disagree on node count");

  const NodeTable& table = bundle.table;
  PipelineResult res;
  res.config = cfg;
  res.task = table.task;
  res.score_kind = cfg.resolve_score_kind(table.task);
  res.test_ids = table.ids_in_split(Split::test);

  auto calib = table.ids_in_split(Split::calib);
  CalibrationProfile profile = CalibrationProfile::build(table, calib, res.score_kind);

  std::optional<SubspaceContext> ctx;
  switch (cfg.method) {
    case Method::scp:
      res.outputs = predict_scp(profile, table, res.test_ids, cfg.alpha, &res.trace);
      break;
    case Method::rlcp:
      res.outputs = predict_rlcp(profile, table, res.test_ids, cfg.bandwidth, cfg.alpha,
                                 cfg.seed, num_threads, &res.trace);
      break;
    case Method::graphlcp: {
      ctx.emplace(build_subspace(bundle, cfg));
      res.homophily = ctx->homophily;
      res.effective_pca_dim = ctx->effective_dim;
      res.pca = ctx->pca;
      DensifyConfig dcfg{cfg.tau0, cfg.gamma, cfg.densify_iters};
      res.densify_result =
          densify(bundle.graph, ctx->projected, ctx->kernel, ctx->homophily, dcfg, num_threads);
      TransitionView walk(res.densify_result->graph);
      GraphLcpParams params{cfg.variant, cfg.beta, cfg.truncation, cfg.alpha, cfg.seed};
      res.outputs = predict_graphlcp(profile, table, walk, &ctx->projected, &ctx->kernel,
                                     res.test_ids, params, num_threads, &res.trace);
      break;
    }
  }

  res.covered = coverage_flags(table, res.outputs);
  if (!res.test_ids.empty())
    res.metrics = assemble_metrics(bundle, res.test_ids, res.outputs, cfg,
                                   ctx ? &ctx->projected : nullptr);
  return res;
}

namespace {

nlohmann::ordered_json group_to_json(const GroupCoverage& g) {
  nlohmann::ordered_json j;
  j["names"] = g.names;
  j["sizes"] = g.sizes;
  nlohmann::ordered_json covs = nlohmann::ordered_json::array();
  for (double c : g.coverages) covs.push_back(c);  // NaN serializes as null
  j["coverages"] = std::move(covs);
  j["min_coverage"] = g.min_coverage;
  return j;
}

}  // namespace

nlohmann::ordered_json metrics_to_json(const MetricsBlock& metrics) {
  nlohmann::ordered_json j;
  {
    nlohmann::ordered_json m;
    m["coverage"] = metrics.marginal.coverage;
    m["mean_size"] = metrics.marginal.mean_size;
    m["infinite_fraction"] = metrics.marginal.infinite_fraction;
    m["count"] = metrics.marginal.count;
    j["marginal"] = std::move(m);
  }
  {
    nlohmann::ordered_json w;
    w["value"] = metrics.wsc.value;
    nlohmann::ordered_json dir = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < metrics.wsc.slab.direction.size(); ++k)
      dir.push_back(metrics.wsc.slab.direction(k));
    w["direction"] = std::move(dir);
    w["lower"] = metrics.wsc.slab.lower;
    w["upper"] = metrics.wsc.slab.upper;
    w["mass"] = metrics.wsc.slab.mass;
    j["wsc"] = std::move(w);
  }
  {
    nlohmann::ordered_json g;
    g["homophily"] = group_to_json(metrics.by_homophily);
    g["degree"] = group_to_json(metrics.by_degree);
    g["clustering"] = group_to_json(metrics.by_clustering);
    g["embedding_cluster"] = group_to_json(metrics.by_cluster);
    j["groups"] = std::move(g);
  }
  return j;
}

nlohmann::ordered_json report_to_json(const Bundle& bundle, const PipelineResult& result) {
  const NodeTable& table = bundle.table;
  nlohmann::ordered_json j;
  j["config"] = result.config.to_json();
  j["task"] = to_string(result.task);
  j["score_kind_resolved"] = to_string(result.score_kind);
  {
    nlohmann::ordered_json counts;
    counts["nodes"] = table.num_nodes();
    counts["train"] = table.ids_in_split(Split::train).size();
    counts["valid"] = table.ids_in_split(Split::valid).size();
    counts["calib"] = table.ids_in_split(Split::calib).size();
    counts["test"] = result.test_ids.size();
    j["counts"] = std::move(counts);
  }
  if (result.homophily) {
    j["graph_homophily"] = *result.homophily;
    j["effective_pca_dim"] = result.effective_pca_dim;
  }
  if (result.densify_result) {
    const DensifyResult& d = *result.densify_result;
    nlohmann::ordered_json dj;
    dj["tau"] = d.tau;
    dj["edge_ratio"] = d.edge_ratio;
    dj["iterations"] = d.iterations;
    dj["edges_added"] = d.edges_added;
    dj["ratio_lower"] = d.bounds.lower;
    dj["ratio_upper"] = d.bounds.upper;
    dj["converged"] = d.converged;
    dj["entries"] = d.graph.num_entries();
    j["densify"] = std::move(dj);
  } else {
    j["densify"] = nullptr;
  }
  j["metrics"] = result.metrics ? metrics_to_json(*result.metrics) : nlohmann::ordered_json(nullptr);
  {
    nlohmann::ordered_json preds = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.outputs.size(); ++i) {
      const PredictionOutput& out = result.outputs[i];
      nlohmann::ordered_json row;
      row["node_id"] = out.node_id;
      row["quantile"] = out.quantile;
      if (result.task == TaskKind::regression) {
        row["lower"] = out.lower;
        row["upper"] = out.upper;
      } else {
        row["labels"] = out.label_set;
      }
      row["covered"] = static_cast<bool>(result.covered[i]);
      preds.push_back(std::move(row));
    }
    j["predictions"] = std::move(preds);
  }
  return j;
}

}  // namespace glcp
