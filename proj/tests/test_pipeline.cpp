#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "glcp/io.hpp"
#include "glcp/pipeline.hpp"
#include "glcp/synth.hpp"

using namespace glcp;

namespace {

Bundle make_bundle(TaskKind task, NodeId n, std::uint64_t seed) {
  SbmSpec spec;
  spec.num_nodes = n;
  spec.num_blocks = 3;
  spec.intra_prob = 0.12;
  spec.inter_prob = 0.01;
  spec.feature_dim = 8;
  spec.task = task;
  spec.seed = seed;
  SynthBundle s = make_sbm_bundle(spec, 2, {0.4, 0.1, 0.2, 0.3});
  return Bundle{std::move(s.graph), std::move(s.table)};
}

}  // namespace

TEST_CASE("subspace stage clamps the retained dimension to the data") {
  Bundle b = make_bundle(TaskKind::classification, 120, 3);
  RunConfig cfg;
  cfg.pca_dim = 64;  // far above the 8 embedding dimensions
  SubspaceContext ctx = build_subspace(b, cfg);
  CHECK(ctx.effective_dim == 8);
  CHECK(ctx.projected.rows() == 120);
  CHECK(ctx.projected.cols() == 8);
  CHECK(ctx.homophily >= 0.0);
  CHECK(ctx.homophily <= 1.0);
  CHECK(ctx.kernel.dim() == 8);

  cfg.pca_dim = 3;
  SubspaceContext small = build_subspace(b, cfg);
  CHECK(small.effective_dim == 3);
  CHECK(small.pca.eigenvalues.size() == 3);

  // Too few calibration nodes to span anything.
  Bundle tiny = b;
  int kept = 0;
  for (auto& s : tiny.table.splits)
    if (s == Split::calib && ++kept > 1) s = Split::valid;
  CHECK_THROWS_AS(build_subspace(tiny, cfg), input_error);
}

TEST_CASE("full structure-aware run produces a complete deterministic result") {
  Bundle b = make_bundle(TaskKind::classification, 150, 7);
  RunConfig cfg;
  cfg.method = Method::graphlcp;
  cfg.beta = 0.2;
  cfg.truncation = 20;
  cfg.pca_dim = 4;
  cfg.num_directions = 20;
  cfg.seed = 5;

  PipelineResult r1 = run_pipeline(b, cfg, 1);
  PipelineResult r2 = run_pipeline(b, cfg, 3);

  CHECK(r1.task == TaskKind::classification);
  CHECK(r1.score_kind == ScoreKind::aps);
  CHECK(r1.homophily.has_value());
  CHECK(r1.effective_pca_dim == 4);
  CHECK(r1.densify_result.has_value());
  CHECK(r1.test_ids == b.table.ids_in_split(Split::test));
  CHECK(r1.outputs.size() == r1.test_ids.size());
  CHECK(r1.covered.size() == r1.outputs.size());
  CHECK(r1.metrics.has_value());

  // Thread count must not leak into any numeric output.
  REQUIRE(r1.outputs.size() == r2.outputs.size());
  for (std::size_t i = 0; i < r1.outputs.size(); ++i) {
    CHECK(r1.outputs[i].quantile == r2.outputs[i].quantile);
    CHECK(r1.outputs[i].label_set == r2.outputs[i].label_set);
  }
  CHECK(r1.metrics->marginal.coverage == r2.metrics->marginal.coverage);
  CHECK(r1.metrics->wsc.value == r2.metrics->wsc.value);

  // Serialized reports agree byte for byte.
  std::string j1 = dump_json(report_to_json(b, r1));
  std::string j2 = dump_json(report_to_json(b, r2));
  CHECK(j1 == j2);
}

TEST_CASE("baseline methods skip the subspace stage") {
  Bundle b = make_bundle(TaskKind::regression, 100, 11);
  RunConfig cfg;
  cfg.method = Method::scp;
  cfg.num_directions = 10;
  PipelineResult r = run_pipeline(b, cfg);
  CHECK(r.score_kind == ScoreKind::abs_residual);
  CHECK_FALSE(r.homophily.has_value());
  CHECK(r.effective_pca_dim == 0);
  CHECK_FALSE(r.densify_result.has_value());
  CHECK_FALSE(r.pca.has_value());
  // Every interval is centered on the point prediction with one shared width.
  double q = r.outputs[0].quantile;
  for (const auto& out : r.outputs) {
    CHECK(out.quantile == q);
    if (std::isfinite(q)) {
      CHECK(out.upper - b.table.y_hat[out.node_id] == doctest::Approx(q));
    }
  }

  cfg.method = Method::rlcp;
  cfg.bandwidth = 1.5;
  PipelineResult rl = run_pipeline(b, cfg);
  CHECK_FALSE(rl.densify_result.has_value());
  CHECK(rl.outputs.size() == r.outputs.size());
  PipelineResult rl2 = run_pipeline(b, cfg, 2);
  for (std::size_t i = 0; i < rl.outputs.size(); ++i)
    CHECK(rl.outputs[i].quantile == rl2.outputs[i].quantile);
}

TEST_CASE("reports carry the expected sections") {
  Bundle b = make_bundle(TaskKind::classification, 90, 13);
  RunConfig cfg;
  cfg.method = Method::graphlcp;
  cfg.pca_dim = 3;
  cfg.num_directions = 8;
  PipelineResult r = run_pipeline(b, cfg);
  nlohmann::ordered_json j = report_to_json(b, r);

  CHECK(j.contains("config"));
  CHECK(j.contains("task"));
  CHECK(j["task"] == "classification");
  CHECK(j["score_kind_resolved"] == "aps");
  CHECK(j["counts"]["nodes"] == 90);
  CHECK(j["counts"]["calib"].get<int>() ==
        static_cast<int>(b.table.ids_in_split(Split::calib).size()));
  CHECK(j.contains("graph_homophily"));
  CHECK(j.contains("densify"));
  CHECK_FALSE(j["densify"].is_null());
  CHECK(j["densify"].contains("edge_ratio"));
  CHECK(j["densify"].contains("converged"));
  CHECK(j.contains("metrics"));
  CHECK(j["metrics"]["marginal"].contains("coverage"));
  CHECK(j["metrics"]["groups"].contains("homophily"));
  CHECK(j["metrics"]["groups"].contains("degree"));
  CHECK(j["metrics"]["groups"].contains("clustering"));
  CHECK(j["metrics"]["groups"].contains("embedding_cluster"));
  REQUIRE(j.contains("predictions"));
  REQUIRE(j["predictions"].is_array());
  CHECK(j["predictions"].size() == r.outputs.size());
  const auto& first = j["predictions"][0];
  CHECK(first.contains("node_id"));
  CHECK(first.contains("quantile"));
  CHECK(first.contains("labels"));
  CHECK(first.contains("covered"));

  // The config echo reparses into the same settings.
  RunConfig echoed = RunConfig::from_json(j["config"]);
  CHECK(echoed.alpha == cfg.alpha);
  CHECK(echoed.pca_dim == cfg.pca_dim);
}

TEST_CASE("an empty test split yields predictions but no metrics") {
  Bundle b = make_bundle(TaskKind::regression, 80, 17);
  for (auto& s : b.table.splits)
    if (s == Split::test) s = Split::valid;
  RunConfig cfg;
  cfg.method = Method::scp;
  PipelineResult r = run_pipeline(b, cfg);
  CHECK(r.test_ids.empty());
  CHECK(r.outputs.empty());
  CHECK_FALSE(r.metrics.has_value());
  nlohmann::ordered_json j = report_to_json(b, r);
  CHECK(j["metrics"].is_null());
  CHECK(j["predictions"].empty());
}

TEST_CASE("localization concentrates weight relative to the uniform baseline") {
  // On a strongly blocked graph, walk-localized weights on same-block
  // calibration nodes should exceed the uniform share on average.
  Bundle b = make_bundle(TaskKind::classification, 180, 19);
  RunConfig cfg;
  cfg.method = Method::graphlcp;
  cfg.beta = 0.2;
  cfg.truncation = 25;
  cfg.pca_dim = 4;
  cfg.num_directions = 8;
  PipelineResult r = run_pipeline(b, cfg);

  auto calib = b.table.ids_in_split(Split::calib);
  std::vector<NodeId> sorted_calib = calib;
  std::sort(sorted_calib.begin(), sorted_calib.end());
  std::vector<int> blocks = sbm_blocks(180, 3);
  const double uniform = 1.0 / static_cast<double>(calib.size() + 1);

  double same_sum = 0.0;
  std::size_t same_count = 0;
  for (std::size_t i = 0; i < r.test_ids.size(); ++i) {
    for (std::size_t k = 0; k < sorted_calib.size(); ++k) {
      if (blocks[sorted_calib[k]] == blocks[r.test_ids[i]]) {
        same_sum += r.trace.calib_weights[i][k];
        ++same_count;
      }
    }
  }
  CHECK(same_sum / static_cast<double>(same_count) > uniform);
}

TEST_CASE("validation failures surface before any work happens") {
  Bundle b = make_bundle(TaskKind::regression, 60, 23);
  RunConfig bad;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(run_pipeline(b, bad), param_error);
  RunConfig cfg;
  CHECK_THROWS_AS(run_pipeline(b, cfg, 0), param_error);
}
