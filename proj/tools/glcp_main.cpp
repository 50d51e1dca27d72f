// Command-line front end: run conformal predictors on a data bundle, inspect
// densification, recompute metrics from a report, generate benchmark data,
// and sweep one parameter. Exit codes: 0 success, 2 validation failure,
// 1 unexpected error.

#include <CLI11.hpp>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "glcp/io.hpp"
#include "glcp/pipeline.hpp"
#include "glcp/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace glcp;

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write " + path.string());
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_text(out_path, content);
  }
}

std::vector<double> parse_double_list(const std::string& s, const std::string& context) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos
                                                                 : comma - start);
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw param_error(context + ": cannot parse number '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

RunConfig make_config(const std::string& config_path, const std::string& method_flag,
                      bool seed_set, std::uint64_t seed_flag) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (!method_flag.empty()) cfg.method = parse_method(method_flag);
  if (seed_set) cfg.seed = seed_flag;
  cfg.validate();
  return cfg;
}

std::string ecdf_csv(const WeightTrace& trace) {
  std::vector<double> pool;
  for (const auto& row : trace.calib_weights) pool.insert(pool.end(), row.begin(), row.end());
  EcdfTable table = weight_ecdf(std::move(pool));
  std::string s = "prob,value\n";
  for (std::size_t i = 0; i < table.probs.size(); ++i)
    s += format_float(table.probs[i]) + "," + format_float(table.values[i]) + "\n";
  return s;
}

void apply_sweep_param(RunConfig& cfg, const std::string& name, double v) {
  auto as_int = [&](int lo) {
    if (v != std::floor(v))
      throw param_error("sweep: parameter '" + name + "' takes integer values");
    int iv = static_cast<int>(v);
    if (iv < lo) throw param_error("sweep: parameter '" + name + "' out of range");
    return iv;
  };
  if (name == "alpha") cfg.alpha = v;
  else if (name == "beta") cfg.beta = v;
  else if (name == "bandwidth") cfg.bandwidth = v;
  else if (name == "tau0") cfg.tau0 = v;
  else if (name == "gamma") cfg.gamma = v;
  else if (name == "truncation") cfg.truncation = as_int(0);
  else if (name == "densify_iters") cfg.densify_iters = as_int(1);
  else if (name == "pca_dim") cfg.pca_dim = as_int(1);
  else if (name == "num_directions") cfg.num_directions = as_int(1);
  else throw param_error("sweep: unknown parameter '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized conformal prediction for node-level tasks on graphs"};
  app.require_subcommand(1);

  // Shared option storage.
  std::string data_dir, config_path, out_path, method_flag;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  int parallel = 1;

  auto add_common = [&](CLI::App* cmd, bool with_method) {
    cmd->add_option("--data", data_dir, "Data bundle directory")->required();
    cmd->add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
    cmd->add_option("--out", out_path, "Output file (stdout when omitted)");
    if (with_method)
      cmd->add_option("--method", method_flag, "Override method: scp | rlcp | graphlcp");
    cmd->add_option("--seed", seed_flag, "Override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--parallel", parallel, "Worker thread count")
        ->default_val(1)
        ->check(CLI::PositiveNumber);
  };

  CLI::App* cmd_run = app.add_subcommand("run", "Run a conformal predictor and write a report");
  std::string ecdf_out, pca_out;
  add_common(cmd_run, true);
  cmd_run->add_option("--ecdf-out", ecdf_out,
                      "Write the pooled calibration-weight ECDF as CSV");
  cmd_run->add_option("--pca-out", pca_out, "Write the fitted projection model as JSON");

  CLI::App* cmd_densify =
      app.add_subcommand("densify", "Run the densification stage and report the result");
  std::string edges_out;
  add_common(cmd_densify, false);
  cmd_densify->add_option("--edges-out", edges_out, "Write added edges as CSV (src,dst,weight)");

  CLI::App* cmd_eval =
      app.add_subcommand("eval", "Recompute metrics for an existing report against a bundle");
  std::string report_path;
  add_common(cmd_eval, false);
  cmd_eval->add_option("--report", report_path, "Report JSON produced by run")->required();

  CLI::App* cmd_synth = app.add_subcommand("synth", "Generate a benchmark bundle");
  std::string synth_out, synth_task = "classification", synth_fracs = "0.4,0.1,0.1,0.4";
  SbmSpec spec;
  int synth_layers = 2;
  cmd_synth->add_option("--out", synth_out, "Bundle output directory")->required();
  cmd_synth->add_option("--nodes", spec.num_nodes, "Node count")->default_val(800);
  cmd_synth->add_option("--blocks", spec.num_blocks, "Block count")->default_val(4);
  cmd_synth->add_option("--intra", spec.intra_prob, "Within-block edge probability")
      ->default_val(0.05);
  cmd_synth->add_option("--inter", spec.inter_prob, "Cross-block edge probability")
      ->default_val(0.005);
  cmd_synth->add_option("--dim", spec.feature_dim, "Feature dimension")->default_val(16);
  cmd_synth->add_option("--noise", spec.label_noise, "Label noise level")->default_val(0.1);
  cmd_synth->add_option("--task", synth_task, "regression | classification")
      ->default_val("classification");
  cmd_synth->add_option("--seed", spec.seed, "Generator seed")->default_val(0);
  cmd_synth->add_option("--layers", synth_layers, "Feature smoothing layers")->default_val(2);
  cmd_synth->add_option("--fracs", synth_fracs, "train,valid,calib,test fractions")
      ->default_val("0.4,0.1,0.1,0.4");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "Run one parameter over several values");
  std::string sweep_param, sweep_values;
  add_common(cmd_sweep, true);
  cmd_sweep->add_option("--param", sweep_param, "Parameter to vary")->required();
  cmd_sweep->add_option("--values", sweep_values, "Comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_run->parsed()) {
      Bundle bundle = load_bundle(data_dir);
      RunConfig cfg = make_config(config_path, method_flag, seed_set, seed_flag);
      PipelineResult result = run_pipeline(bundle, cfg, parallel);
      emit(out_path, dump_json(report_to_json(bundle, result)));
      if (!ecdf_out.empty()) write_text(ecdf_out, ecdf_csv(result.trace));
      if (!pca_out.empty()) {
        if (!result.pca)
          throw param_error("run: --pca-out needs the graphlcp method");
        write_text(pca_out, dump_json(pca_to_json(*result.pca)));
      }
      return 0;
    }

    if (cmd_densify->parsed()) {
      Bundle bundle = load_bundle(data_dir);
      RunConfig cfg = make_config(config_path, "", seed_set, seed_flag);
      SubspaceContext ctx = build_subspace(bundle, cfg);
      DensifyConfig dcfg{cfg.tau0, cfg.gamma, cfg.densify_iters};
      DensifyResult dens =
          densify(bundle.graph, ctx.projected, ctx.kernel, ctx.homophily, dcfg, parallel);

      nlohmann::ordered_json j;
      j["config"] = cfg.to_json();
      j["graph_homophily"] = ctx.homophily;
      j["effective_pca_dim"] = ctx.effective_dim;
      j["nodes"] = bundle.graph.num_nodes();
      j["tau"] = dens.tau;
      j["edge_ratio"] = dens.edge_ratio;
      j["iterations"] = dens.iterations;
      j["edges_added"] = dens.edges_added;
      j["ratio_lower"] = dens.bounds.lower;
      j["ratio_upper"] = dens.bounds.upper;
      j["converged"] = dens.converged;
      j["entries"] = dens.graph.num_entries();
      emit(out_path, dump_json(j));

      if (!edges_out.empty()) {
        std::string s = "src,dst,weight\n";
        for (NodeId u = 0; u < dens.graph.num_nodes(); ++u) {
          auto nbrs = dens.graph.neighbors(u);
          auto ws = dens.graph.weights(u);
          for (std::size_t k = 0; k < nbrs.size(); ++k) {
            if (nbrs[k] < u || bundle.graph.has_edge(u, nbrs[k])) continue;
            s += std::to_string(u) + "," + std::to_string(nbrs[k]) + "," +
                 format_float(ws[k]) + "\n";
          }
        }
        write_text(edges_out, s);
      }
      return 0;
    }

    if (cmd_eval->parsed()) {
      Bundle bundle = load_bundle(data_dir);
      nlohmann::json report;
      try {
        std::ifstream in(report_path, std::ios::binary);
        if (!in) throw input_error("cannot open " + report_path);
        report = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw input_error("report " + report_path + ": " + e.what());
      }

      RunConfig cfg = report.contains("config") ? RunConfig::from_json(report.at("config"))
                                                : RunConfig{};
      // Metric recomputation always works in the raw embedding space; the
      // projection model is not part of the report.
      cfg.wsc_space = "raw";

      if (!report.contains("task") || !report.contains("predictions"))
        throw input_error("report: missing task or predictions");
      TaskKind task = report.at("task").get<std::string>() == "regression"
                          ? TaskKind::regression
                          : TaskKind::classification;
      if (task != bundle.table.task)
        throw input_error("report task does not match the data bundle");

      std::vector<NodeId> test_ids;
      std::vector<PredictionOutput> outputs;
      for (const auto& row : report.at("predictions")) {
        PredictionOutput out;
        out.node_id = row.at("node_id").get<NodeId>();
        out.quantile = json_to_double(row.at("quantile"));
        if (task == TaskKind::regression) {
          out.lower = json_to_double(row.at("lower"));
          out.upper = json_to_double(row.at("upper"));
        } else {
          out.label_set = row.at("labels").get<std::vector<int>>();
          std::sort(out.label_set.begin(), out.label_set.end());
        }
        test_ids.push_back(out.node_id);
        outputs.push_back(std::move(out));
      }
      if (outputs.empty()) throw input_error("report: no predictions to evaluate");

      MetricsBlock metrics = assemble_metrics(bundle, test_ids, outputs, cfg, nullptr);
      nlohmann::ordered_json j;
      j["config"] = cfg.to_json();
      j["task"] = to_string(task);
      j["metrics"] = metrics_to_json(metrics);
      emit(out_path, dump_json(j));
      return 0;
    }

    if (cmd_synth->parsed()) {
      if (synth_task == "regression") spec.task = TaskKind::regression;
      else if (synth_task == "classification") spec.task = TaskKind::classification;
      else throw param_error("synth: task must be regression or classification");
      auto fr = parse_double_list(synth_fracs, "synth fractions");
      if (fr.size() != 4) throw param_error("synth: --fracs needs four values");
      std::array<double, 4> fracs{fr[0], fr[1], fr[2], fr[3]};
      SynthBundle bundle = make_sbm_bundle(spec, synth_layers, fracs);
      save_bundle(synth_out, bundle.graph, bundle.table);
      return 0;
    }

    if (cmd_sweep->parsed()) {
      Bundle bundle = load_bundle(data_dir);
      RunConfig base = make_config(config_path, method_flag, seed_set, seed_flag);
      std::vector<double> values = parse_double_list(sweep_values, "sweep values");
      if (values.empty()) throw param_error("sweep: no values given");

      std::string csv =
          "param,value,coverage,mean_size,infinite_fraction,wsc,"
          "min_homophily,min_degree,min_clustering,min_cluster\n";
      for (double v : values) {
        RunConfig cfg = base;
        apply_sweep_param(cfg, sweep_param, v);
        cfg.validate();
        PipelineResult result = run_pipeline(bundle, cfg, parallel);
        if (!result.metrics) throw input_error("sweep: the bundle has no test nodes");
        const MetricsBlock& m = *result.metrics;
        csv += sweep_param + "," + format_float(v) + "," +
               format_float(m.marginal.coverage) + "," + format_float(m.marginal.mean_size) +
               "," + format_float(m.marginal.infinite_fraction) + "," +
               format_float(m.wsc.value) + "," + format_float(m.by_homophily.min_coverage) +
               "," + format_float(m.by_degree.min_coverage) + "," +
               format_float(m.by_clustering.min_coverage) + "," +
               format_float(m.by_cluster.min_coverage) + "\n";
      }
      emit(out_path, csv);
      return 0;
    }

    throw param_error("no subcommand given");
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const param_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
