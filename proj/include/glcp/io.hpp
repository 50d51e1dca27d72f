#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "glcp/conformal.hpp"
#include "glcp/graph.hpp"
#include "glcp/node_table.hpp"
#include "glcp/pca.hpp"

namespace glcp {

enum class Method { scp, rlcp, graphlcp };

Method parse_method(const std::string& token);
const char* to_string(Method m);
Split parse_split(const std::string& token);

/// Run settings. Field ranges are validated as a whole by validate(); loading
/// rejects unknown keys so typos fail loudly instead of silently defaulting.
struct RunConfig {
  double alpha = 0.1;
  Method method = Method::graphlcp;
  GraphLcpVariant variant = GraphLcpVariant::ppr;
  double beta = 0.3;        // walk restart probability
  int truncation = 30;      // walk length cap
  double bandwidth = 2.0;   // kernel bandwidth h
  double tau0 = 0.5;        // initial densification threshold
  double gamma = 0.1;       // densification threshold step
  int densify_iters = 20;   // densification pass budget
  int pca_dim = 8;          // retained principal dimensions (clamped to data)
  double delta_wsc = 0.2;   // minimum slab mass
  int num_directions = 100; // slab directions
  std::string score_kind = "auto";  // auto | abs_residual | aps | thr
  std::uint64_t seed = 0;
  std::array<double, 4> split_fractions{0.4, 0.1, 0.1, 0.4};
  std::string wsc_space = "raw";  // raw | pca (pca only with graphlcp)

  void validate() const;
  ScoreKind resolve_score_kind(TaskKind task) const;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

RunConfig load_config(const std::filesystem::path& file);

/// One dataset: graph plus per-node table, loaded from a directory of CSV
/// files (edges.csv, embeddings.csv, labels.csv, predictions.csv, splits.csv).
/// The embedding row count fixes the node count; every other file must agree.
struct Bundle {
  SparseGraph graph;
  NodeTable table;
};

Bundle load_bundle(const std::filesystem::path& dir);

/// Writes the same five CSV files load_bundle reads. Floats round-trip exactly
/// via 17-significant-digit formatting. Only unit-weight graphs are
/// serializable, matching the edge-list format.
void save_bundle(const std::filesystem::path& dir, const SparseGraph& graph,
                 const NodeTable& table);

/// Shortest-faithful float formatting for all serialized numbers: 17
/// significant digits, infinities as the strings "inf"/"-inf".
std::string format_float(double v);

/// Deterministic JSON writer: insertion-ordered keys, floats through
/// format_float, no locale dependence. NaN becomes null.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

/// Reads a JSON number that may have been serialized as "inf"/"-inf".
double json_to_double(const nlohmann::json& j);

nlohmann::ordered_json pca_to_json(const PcaModel& model);
PcaModel pca_from_json(const nlohmann::json& j);

}  // namespace glcp
