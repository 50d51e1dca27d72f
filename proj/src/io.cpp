#include "glcp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace glcp {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw input_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::string content = read_file(p);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw input_error(context + ": cannot parse number '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& context) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw input_error(context + ": cannot parse integer '" + s + "'");
  return v;
}

NodeId parse_node(const std::string& s, NodeId num_nodes, const std::string& context) {
  std::uint64_t v = parse_uint(s, context);
  if (v >= num_nodes)
    throw input_error(context + ": node id " + s + " out of range [0, " +
                      std::to_string(num_nodes) + ")");
  return static_cast<NodeId>(v);
}

void check_header(const std::vector<std::string>& lines, const std::string& expected,
                  const std::string& file) {
  if (lines.empty()) throw input_error(file + ": empty file");
  if (lines[0] != expected)
    throw input_error(file + ": expected header '" + expected + "', found '" + lines[0] + "'");
}

}  // namespace

Method parse_method(const std::string& token) {
  if (token == "scp") return Method::scp;
  if (token == "rlcp") return Method::rlcp;
  if (token == "graphlcp") return Method::graphlcp;
  throw param_error("unknown method: " + token);
}

const char* to_string(Method m) {
  switch (m) {
    case Method::scp: return "scp";
    case Method::rlcp: return "rlcp";
    case Method::graphlcp: return "graphlcp";
  }
  throw param_error("unknown method value");
}

Split parse_split(const std::string& token) {
  if (token == "train") return Split::train;
  if (token == "valid") return Split::valid;
  if (token == "calib") return Split::calib;
  if (token == "test") return Split::test;
  throw input_error("unknown split token: " + token);
}

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw param_error("config: alpha must lie in (0,1)");
  if (!(beta > 0.0 && beta <= 1.0)) throw param_error("config: beta must lie in (0,1]");
  if (truncation < 0) throw param_error("config: truncation must be non-negative");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw param_error("config: bandwidth must be positive");
  if (!(tau0 > 0.0 && tau0 < 1.0)) throw param_error("config: tau0 must lie in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw param_error("config: gamma must lie in (0,1)");
  if (densify_iters < 1) throw param_error("config: densify_iters must be positive");
  if (pca_dim < 1) throw param_error("config: pca_dim must be positive");
  if (!(delta_wsc > 0.0 && delta_wsc < 1.0)) throw param_error("config: delta_wsc must lie in (0,1)");
  if (num_directions < 1) throw param_error("config: num_directions must be positive");
  if (score_kind != "auto" && score_kind != "abs_residual" && score_kind != "aps" &&
      score_kind != "thr")
    throw param_error("config: unknown score_kind: " + score_kind);
  double sum = 0.0;
  for (double f : split_fractions) {
    if (!(f >= 0.0)) throw param_error("config: split fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw param_error("config: split fractions must sum to one");
  if (wsc_space != "raw" && wsc_space != "pca")
    throw param_error("config: wsc_space must be raw or pca");
  if (wsc_space == "pca" && method != Method::graphlcp)
    throw param_error("config: wsc_space pca requires the graphlcp method");
}

ScoreKind RunConfig::resolve_score_kind(TaskKind task) const {
  if (score_kind == "auto")
    return task == TaskKind::regression ? ScoreKind::abs_residual : ScoreKind::aps;
  if (score_kind == "abs_residual") return ScoreKind::abs_residual;
  if (score_kind == "aps") return ScoreKind::aps;
  if (score_kind == "thr") return ScoreKind::thr;
  throw param_error("config: unknown score_kind: " + score_kind);
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw input_error("config: top-level JSON must be an object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "method") cfg.method = parse_method(value.get<std::string>());
      else if (key == "variant") cfg.variant = parse_graphlcp_variant(value.get<std::string>());
      else if (key == "beta") cfg.beta = value.get<double>();
      else if (key == "truncation") cfg.truncation = value.get<int>();
      else if (key == "bandwidth") cfg.bandwidth = value.get<double>();
      else if (key == "tau0") cfg.tau0 = value.get<double>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "densify_iters") cfg.densify_iters = value.get<int>();
      else if (key == "pca_dim") cfg.pca_dim = value.get<int>();
      else if (key == "delta_wsc") cfg.delta_wsc = value.get<double>();
      else if (key == "num_directions") cfg.num_directions = value.get<int>();
      else if (key == "score_kind") cfg.score_kind = value.get<std::string>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "wsc_space") cfg.wsc_space = value.get<std::string>();
      else if (key == "split_fractions") {
        auto v = value.get<std::vector<double>>();
        if (v.size() != 4) throw input_error("config: split_fractions needs four entries");
        for (std::size_t i = 0; i < 4; ++i) cfg.split_fractions[i] = v[i];
      } else {
        throw input_error("config: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw input_error("config: bad value for '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["alpha"] = alpha;
  j["method"] = to_string(method);
  j["variant"] = to_string(variant);
  j["beta"] = beta;
  j["truncation"] = truncation;
  j["bandwidth"] = bandwidth;
  j["tau0"] = tau0;
  j["gamma"] = gamma;
  j["densify_iters"] = densify_iters;
  j["pca_dim"] = pca_dim;
  j["delta_wsc"] = delta_wsc;
  j["num_directions"] = num_directions;
  j["score_kind"] = score_kind;
  j["seed"] = seed;
  j["split_fractions"] = split_fractions;
  j["wsc_space"] = wsc_space;
  return j;
}

RunConfig load_config(const std::filesystem::path& file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw input_error("config " + file.string() + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

Bundle load_bundle(const std::filesystem::path& dir) {
  if (!fs::is_directory(dir)) throw input_error("bundle directory not found: " + dir.string());

  Bundle bundle;
  NodeTable& table = bundle.table;

  // embeddings.csv has no header; its row count fixes the node count.
  {
    auto lines = read_lines(dir / "embeddings.csv");
    if (lines.empty()) throw input_error("embeddings.csv: empty file");
    std::size_t n = lines.size();
    std::size_t d = split_fields(lines[0]).size();
    if (d == 0) throw input_error("embeddings.csv: empty row");
    table.embeddings.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
      auto fields = split_fields(lines[i]);
      if (fields.size() != d)
        throw input_error("embeddings.csv row " + std::to_string(i) + ": expected " +
                          std::to_string(d) + " columns, found " + std::to_string(fields.size()));
      for (std::size_t k = 0; k < d; ++k)
        table.embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            parse_double(fields[k], "embeddings.csv row " + std::to_string(i));
    }
  }
  const NodeId n = table.num_nodes();

  // predictions.csv decides the task through its header.
  {
    auto lines = read_lines(dir / "predictions.csv");
    if (lines.empty()) throw input_error("predictions.csv: empty file");
    auto header = split_fields(lines[0]);
    if (header.size() < 2 || header[0] != "node_id")
      throw input_error("predictions.csv: header must start with node_id");
    bool regression = header.size() == 2 && header[1] == "y_hat";
    if (!regression) {
      for (std::size_t c = 0; c + 1 < header.size(); ++c)
        if (header[c + 1] != "p_" + std::to_string(c))
          throw input_error("predictions.csv: expected probability column p_" +
                            std::to_string(c) + ", found '" + header[c + 1] + "'");
    }
    if (lines.size() - 1 != n)
      throw input_error("predictions.csv: expected " + std::to_string(n) + " rows, found " +
                        std::to_string(lines.size() - 1));

    table.task = regression ? TaskKind::regression : TaskKind::classification;
    std::vector<char> seen(n, 0);
    if (regression) {
      table.y_hat.assign(n, 0.0);
    } else {
      table.num_classes = static_cast<int>(header.size() - 1);
      table.class_probs.resize(static_cast<Eigen::Index>(n), table.num_classes);
    }
    for (std::size_t r = 1; r < lines.size(); ++r) {
      auto fields = split_fields(lines[r]);
      std::string ctx = "predictions.csv row " + std::to_string(r);
      if (fields.size() != header.size()) throw input_error(ctx + ": column count mismatch");
      NodeId id = parse_node(fields[0], n, ctx);
      if (seen[id]) throw input_error(ctx + ": duplicate node id " + fields[0]);
      seen[id] = 1;
      if (regression) {
        table.y_hat[id] = parse_double(fields[1], ctx);
      } else {
        for (int c = 0; c < table.num_classes; ++c)
          table.class_probs(static_cast<Eigen::Index>(id), c) =
              parse_double(fields[static_cast<std::size_t>(c) + 1], ctx);
      }
    }
  }

  // labels.csv: integer class ids or real-valued targets, depending on task.
  {
    auto lines = read_lines(dir / "labels.csv");
    check_header(lines, "node_id,label", "labels.csv");
    if (lines.size() - 1 != n)
      throw input_error("labels.csv: expected " + std::to_string(n) + " rows, found " +
                        std::to_string(lines.size() - 1));
    std::vector<char> seen(n, 0);
    if (table.task == TaskKind::regression) {
      table.targets.assign(n, 0.0);
    } else {
      table.labels.assign(n, -1);
    }
    for (std::size_t r = 1; r < lines.size(); ++r) {
      auto fields = split_fields(lines[r]);
      std::string ctx = "labels.csv row " + std::to_string(r);
      if (fields.size() != 2) throw input_error(ctx + ": expected two columns");
      NodeId id = parse_node(fields[0], n, ctx);
      if (seen[id]) throw input_error(ctx + ": duplicate node id " + fields[0]);
      seen[id] = 1;
      if (table.task == TaskKind::regression) {
        table.targets[id] = parse_double(fields[1], ctx);
      } else {
        double v = parse_double(fields[1], ctx);
        if (v != std::floor(v) || v < 0.0 || v >= static_cast<double>(table.num_classes))
          throw input_error(ctx + ": label '" + fields[1] + "' is not a class id in [0, " +
                            std::to_string(table.num_classes) + ")");
        table.labels[id] = static_cast<int>(v);
      }
    }
  }

  // splits.csv: every node gets exactly one assignment.
  {
    auto lines = read_lines(dir / "splits.csv");
    check_header(lines, "node_id,split", "splits.csv");
    if (lines.size() - 1 != n)
      throw input_error("splits.csv: expected " + std::to_string(n) + " rows, found " +
                        std::to_string(lines.size() - 1));
    table.splits.assign(n, Split::train);
    std::vector<char> seen(n, 0);
    for (std::size_t r = 1; r < lines.size(); ++r) {
      auto fields = split_fields(lines[r]);
      std::string ctx = "splits.csv row " + std::to_string(r);
      if (fields.size() != 2) throw input_error(ctx + ": expected two columns");
      NodeId id = parse_node(fields[0], n, ctx);
      if (seen[id]) throw input_error(ctx + ": duplicate node id " + fields[0]);
      seen[id] = 1;
      table.splits[id] = parse_split(fields[1]);
    }
  }

  // edges.csv: undirected edge list.
  {
    auto lines = read_lines(dir / "edges.csv");
    check_header(lines, "src,dst", "edges.csv");
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
      auto fields = split_fields(lines[r]);
      std::string ctx = "edges.csv row " + std::to_string(r);
      if (fields.size() != 2) throw input_error(ctx + ": expected two columns");
      edges.emplace_back(parse_node(fields[0], n, ctx), parse_node(fields[1], n, ctx));
    }
    bundle.graph = SparseGraph::from_edges(n, edges);
  }

  table.validate();
  return bundle;
}

void save_bundle(const std::filesystem::path& dir, const SparseGraph& graph,
                 const NodeTable& table) {
  table.validate();
  if (graph.num_nodes() != table.num_nodes())
    throw input_error("bundle: graph and table disagree on node count");
  fs::create_directories(dir);

  auto write = [&](const fs::path& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write " + (dir / name).string());
    out << content;
  };

  const NodeId n = table.num_nodes();
  {
    std::string s = "src,dst\n";
    for (NodeId u = 0; u < n; ++u) {
      auto nbrs = graph.neighbors(u);
      auto ws = graph.weights(u);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        if (nbrs[k] < u) continue;  // emit each undirected edge once
        if (ws[k] != 1.0)
          throw input_error("bundle: edge list format stores unit weights only");
        s += std::to_string(u) + "," + std::to_string(nbrs[k]) + "\n";
      }
    }
    write("edges.csv", s);
  }
  {
    std::string s;
    for (NodeId i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < table.embeddings.cols(); ++k) {
        if (k) s += ",";
        s += format_float(table.embeddings(static_cast<Eigen::Index>(i), k));
      }
      s += "\n";
    }
    write("embeddings.csv", s);
  }
  {
    std::string s = "node_id,label\n";
    for (NodeId i = 0; i < n; ++i) {
      s += std::to_string(i) + ",";
      s += table.task == TaskKind::regression ? format_float(table.targets[i])
                                              : std::to_string(table.labels[i]);
      s += "\n";
    }
    write("labels.csv", s);
  }
  {
    std::string s = "node_id";
    if (table.task == TaskKind::regression) {
      s += ",y_hat\n";
      for (NodeId i = 0; i < n; ++i)
        s += std::to_string(i) + "," + format_float(table.y_hat[i]) + "\n";
    } else {
      for (int c = 0; c < table.num_classes; ++c) s += ",p_" + std::to_string(c);
      s += "\n";
      for (NodeId i = 0; i < n; ++i) {
        s += std::to_string(i);
        for (int c = 0; c < table.num_classes; ++c)
          s += "," + format_float(table.class_probs(static_cast<Eigen::Index>(i), c));
        s += "\n";
      }
    }
    write("predictions.csv", s);
  }
  {
    std::string s = "node_id,split\n";
    for (NodeId i = 0; i < n; ++i)
      s += std::to_string(i) + "," + std::string(to_string(table.splits[i])) + "\n";
    write("splits.csv", s);
  }
}

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void dump_value(const nlohmann::ordered_json& v, std::string& out, int indent, int depth) {
  auto pad = [&](int levels) { out.append(static_cast<std::size_t>(indent * levels), ' '); };
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, val] : v.items()) {
        pad(depth + 1);
        out += nlohmann::ordered_json(key).dump();
        out += ": ";
        dump_value(val, out, indent, depth + 1);
        if (++i < v.size()) out += ",";
        out += "\n";
      }
      pad(depth);
      out += "}";
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        pad(depth + 1);
        dump_value(v[i], out, indent, depth + 1);
        if (i + 1 < v.size()) out += ",";
        out += "\n";
      }
      pad(depth);
      out += "]";
      return;
    }
    case nlohmann::ordered_json::value_t::number_float: {
      double d = v.get<double>();
      if (std::isnan(d)) {
        out += "null";
      } else if (std::isinf(d)) {
        out += d > 0 ? "\"inf\"" : "\"-inf\"";
      } else {
        out += format_float(d);
      }
      return;
    }
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  dump_value(value, out, indent, 0);
  out += "\n";
  return out;
}

double json_to_double(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw input_error("expected a number, found: " + j.dump());
}

nlohmann::ordered_json pca_to_json(const PcaModel& model) {
  nlohmann::ordered_json j;
  j["input_dim"] = model.input_dim();
  j["retained_dim"] = model.retained_dim();
  nlohmann::ordered_json mean = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) mean.push_back(model.mean(i));
  j["mean"] = std::move(mean);
  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < model.components.cols(); ++c)
      row.push_back(model.components(r, c));
    comps.push_back(std::move(row));
  }
  j["components"] = std::move(comps);
  nlohmann::ordered_json eig = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i)
    eig.push_back(model.eigenvalues(i));
  j["eigenvalues"] = std::move(eig);
  return j;
}

PcaModel pca_from_json(const nlohmann::json& j) {
  try {
    PcaModel model;
    int d = j.at("input_dim").get<int>();
    int c = j.at("retained_dim").get<int>();
    if (d < 1 || c < 1 || c > d) throw input_error("pca json: bad dimensions");
    model.mean.resize(d);
    const auto& mean = j.at("mean");
    if (static_cast<int>(mean.size()) != d) throw input_error("pca json: mean size mismatch");
    for (int i = 0; i < d; ++i) model.mean(i) = json_to_double(mean[static_cast<std::size_t>(i)]);
    const auto& comps = j.at("components");
    if (static_cast<int>(comps.size()) != d) throw input_error("pca json: component rows mismatch");
    model.components.resize(d, c);
    for (int r = 0; r < d; ++r) {
      const auto& row = comps[static_cast<std::size_t>(r)];
      if (static_cast<int>(row.size()) != c)
        throw input_error("pca json: component columns mismatch");
      for (int k = 0; k < c; ++k)
        model.components(r, k) = json_to_double(row[static_cast<std::size_t>(k)]);
    }
    const auto& eig = j.at("eigenvalues");
    if (static_cast<int>(eig.size()) != c) throw input_error("pca json: eigenvalue size mismatch");
    model.eigenvalues.resize(c);
    for (int k = 0; k < c; ++k)
      model.eigenvalues(k) = json_to_double(eig[static_cast<std::size_t>(k)]);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("pca json: ") + e.what());
  }
}

}  // namespace glcp
