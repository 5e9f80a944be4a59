#include "wavegraph/io.hpp"

#include <fstream>
#include <sstream>

#include "wavegraph/error.hpp"

namespace wavegraph {

namespace {

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  return j.is_object() && j.contains(key) ? field<T>(j, key) : fallback;
}

std::vector<double> row_vector(std::span<const double> row) { return {row.begin(), row.end()}; }

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

json params_to_json(const GenParams& p) {
  return {{"min_paths", p.min_paths}, {"max_paths", p.max_paths}, {"delete_prob", p.delete_prob}};
}

}  // namespace

json netlist_to_json(const CircuitNetlist& net) {
  json comps = json::array();
  for (const auto& c : net.components) {
    comps.push_back({{"a", c.a},
                     {"b", c.b},
                     {"kind", component_kind_name(c.kind)},
                     {"resistance", c.resistance},
                     {"voltage", c.voltage},
                     {"positive", c.positive}});
  }
  return {{"nodes", net.node_count}, {"ground", net.ground}, {"components", comps}};
}

CircuitNetlist netlist_from_json(const json& j) {
  CircuitNetlist net;
  net.node_count = field<std::size_t>(j, "nodes");
  net.ground = field<std::size_t>(j, "ground");
  const auto comps = field<json>(j, "components");
  if (!comps.is_array()) throw DataError("'components' must be an array");
  for (const auto& c : comps) {
    Component comp;
    comp.a = field<std::size_t>(c, "a");
    comp.b = field<std::size_t>(c, "b");
    try {
      comp.kind = parse_component_kind(field<std::string>(c, "kind"));
    } catch (const InvalidInput& e) {
      throw DataError(e.what());
    }
    comp.resistance = field_or<double>(c, "resistance", comp.kind == ComponentKind::battery ? kBatteryResistance : 0.0);
    comp.voltage = field_or<double>(c, "voltage", 0.0);
    comp.positive = field_or<std::size_t>(c, "positive", comp.a);
    net.components.push_back(comp);
  }
  try {
    net.validate();
  } catch (const InvalidInput& e) {
    throw DataError(std::string("invalid netlist: ") + e.what());
  }
  return net;
}

CircuitNetlist parse_netlist(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError("netlist parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  return netlist_from_json(j);
}

json example_to_json(const Example& ex) {
  const UGraph& g = ex.graph;
  json nodes = json::array();
  for (NodeId u = 0; u < g.node_count(); ++u) {
    nodes.push_back({{"id", u},
                     {"features", row_vector(g.node_features().row(u))},
                     {"target", row_vector(g.node_targets().row(u))},
                     {"mask", g.target_mask().empty() ? 1 : static_cast<int>(g.target_mask()[u])}});
  }
  json edges = json::array();
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    edges.push_back({{"u", g.edges()[e].u}, {"v", g.edges()[e].v}, {"features", row_vector(g.edge_features().row(e))}});
  }
  json extras = json::object();
  if (task_is_path_like(ex.task)) {
    extras["goals"] = {ex.goal_a, ex.goal_b};
    extras["path"] = ex.path;
    extras["path_count"] = ex.path_count;
  }
  if (ex.netlist) extras["netlist"] = netlist_to_json(*ex.netlist);
  return {{"task", task_name(ex.task)},
          {"generator", ex.generator},
          {"size", ex.size},
          {"seed", ex.seed},
          {"params", params_to_json(ex.params)},
          {"grid_side", ex.grid_side},
          {"nodes", nodes},
          {"edges", edges},
          {"extras", extras}};
}

Example example_from_json(const json& j) {
  Example ex;
  try {
    ex.task = parse_task(field<std::string>(j, "task"));
  } catch (const InvalidInput& e) {
    throw DataError(e.what());
  }
  ex.generator = field<std::string>(j, "generator");
  ex.size = field<std::size_t>(j, "size");
  ex.seed = field<std::uint64_t>(j, "seed");
  const json params = field_or<json>(j, "params", json::object());
  ex.params.task = ex.task;
  if (task_is_path_like(ex.task)) {
    try {
      ex.params.generator = parse_tree_generator(ex.generator);
    } catch (const InvalidInput& e) {
      throw DataError(e.what());
    }
  }
  ex.params.min_paths = field_or<std::size_t>(params, "min_paths", 1);
  ex.params.max_paths = field_or<std::size_t>(params, "max_paths", kMaxPathCount);
  ex.params.delete_prob = field_or<double>(params, "delete_prob", -1.0);
  ex.grid_side = field_or<std::size_t>(j, "grid_side", ex.size);

  const auto nodes = field<json>(j, "nodes");
  const auto edges = field<json>(j, "edges");
  if (!nodes.is_array() || !edges.is_array()) throw DataError("'nodes' and 'edges' must be arrays");
  UGraph g(nodes.size());
  FeatureTable nf, nt, ef;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (field<std::size_t>(n, "id") != i) throw DataError("node ids must be 0..n-1 in order");
    try {
      nf.push_row(field<std::vector<double>>(n, "features"));
      nt.push_row(field<std::vector<double>>(n, "target"));
    } catch (const InvalidInput&) {
      throw DataError("node " + std::to_string(i) + " has a feature or target width that differs from node 0");
    }
    g.target_mask().push_back(static_cast<std::uint8_t>(field_or<int>(n, "mask", 1) != 0));
  }
  for (const auto& e : edges) {
    try {
      g.add_edge(field<std::size_t>(e, "u"), field<std::size_t>(e, "v"));
      ef.push_row(field<std::vector<double>>(e, "features"));
    } catch (const InvalidInput& err) {
      throw DataError(std::string("bad edge: ") + err.what());
    }
  }
  if (nodes.empty()) throw DataError("example has no nodes");
  g.node_features() = std::move(nf);
  g.node_targets() = std::move(nt);
  g.edge_features() = edges.empty() ? FeatureTable(0, task_edge_feature_width(ex.task)) : std::move(ef);
  ex.graph = std::move(g);

  const json extras = field_or<json>(j, "extras", json::object());
  if (task_is_path_like(ex.task)) {
    const auto goals = field<std::vector<std::size_t>>(extras, "goals");
    if (goals.size() != 2) throw DataError("'goals' must hold two node ids");
    ex.goal_a = goals[0];
    ex.goal_b = goals[1];
    ex.path = field<std::vector<std::size_t>>(extras, "path");
    ex.path_count = field_or<std::size_t>(extras, "path_count", 1);
    for (NodeId u : ex.path) {
      if (u >= ex.graph.node_count()) throw DataError("path node out of range");
    }
    if (ex.goal_a >= ex.graph.node_count() || ex.goal_b >= ex.graph.node_count()) {
      throw DataError("goal node out of range");
    }
  }
  if (extras.contains("netlist")) ex.netlist = netlist_from_json(extras["netlist"]);
  if (ex.task == TaskKind::circuits && !ex.netlist) throw DataError("circuit example lacks its netlist");
  try {
    ex.graph.validate();
    refresh_schedule(ex);
  } catch (const InvalidInput& e) {
    throw DataError(std::string("invalid example graph: ") + e.what());
  }
  return ex;
}

void write_dataset(const std::filesystem::path& path, std::span<const Example> data) {
  std::string text;
  for (const auto& ex : data) {
    text += example_to_json(ex).dump();
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<Example> read_dataset(std::istream& in) {
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(example_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DataError("dataset line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Example> read_dataset(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open dataset " + path.string());
  return read_dataset(f);
}

json spec_to_json(const ModelSpec& s) {
  return {{"kind", model_kind_name(s.kind)},
          {"passes", s.passes},
          {"state_size", s.state_size},
          {"edge_state_size", s.edge_state_size},
          {"cell", cell_kind_name(s.cell)},
          {"head", head_kind_name(s.head)},
          {"node_feature_width", s.node_feature_width},
          {"edge_feature_width", s.edge_feature_width},
          {"seed", s.seed}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  try {
    s.kind = parse_model_kind(field<std::string>(j, "kind"));
    s.cell = parse_cell_kind(field<std::string>(j, "cell"));
    s.head = parse_head_kind(field<std::string>(j, "head"));
  } catch (const InvalidInput& e) {
    throw DataError(e.what());
  }
  s.passes = field<std::size_t>(j, "passes");
  s.state_size = field<std::size_t>(j, "state_size");
  s.edge_state_size = field<std::size_t>(j, "edge_state_size");
  s.node_feature_width = field<std::size_t>(j, "node_feature_width");
  s.edge_feature_width = field<std::size_t>(j, "edge_feature_width");
  s.seed = field<std::uint64_t>(j, "seed");
  return s;
}

json checkpoint_to_json(const GraphModel& model, const std::string& rng_state, std::uint64_t iteration) {
  json params = json::object();
  for (const auto& p : model.parameters()) {
    json rows = json::array();
    for (std::size_t r = 0; r < p.tensor.rows(); ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < p.tensor.cols(); ++c) row.push_back(p.tensor.at(r, c));
      rows.push_back(std::move(row));
    }
    params[p.name] = {{"rows", p.tensor.rows()}, {"cols", p.tensor.cols()}, {"data", std::move(rows)}};
  }
  return {{"format", "wavegraph-checkpoint"},
          {"version", 1},
          {"spec", spec_to_json(model.spec())},
          {"parameters", params},
          {"rng_state", rng_state},
          {"iteration", iteration}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (field<std::string>(j, "format") != "wavegraph-checkpoint") throw DataError("not a wavegraph checkpoint");
  if (field<int>(j, "version") != 1) throw DataError("unsupported checkpoint version");
  Checkpoint ck;
  ck.spec = spec_from_json(field<json>(j, "spec"));
  ck.rng_state = field_or<std::string>(j, "rng_state", "");
  ck.iteration = field<std::uint64_t>(j, "iteration");
  const auto params = field<json>(j, "parameters");
  if (!params.is_object()) throw DataError("'parameters' must be an object");
  for (const auto& [name, entry] : params.items()) {
    const auto r = field<std::size_t>(entry, "rows");
    const auto c = field<std::size_t>(entry, "cols");
    const auto rows = field<json>(entry, "data");
    if (!rows.is_array() || rows.size() != r) throw DataError("parameter '" + name + "' does not have " + std::to_string(r) + " rows");
    std::vector<double> data;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != c) throw DataError("parameter '" + name + "' has ragged rows");
      for (const auto& x : row) {
        if (!x.is_number()) throw DataError("parameter '" + name + "' holds a non-number");
        data.push_back(x.get<double>());
      }
    }
    ck.parameters.push_back({name, Tensor({r, c}, std::move(data))});
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const GraphModel& model, const std::string& rng_state,
                     std::uint64_t iteration) {
  write_text_file(path, checkpoint_to_json(model, rng_state, iteration).dump(1) + "\n");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return checkpoint_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw DataError("checkpoint parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
}

std::unique_ptr<GraphModel> load_model(const Checkpoint& ckpt) {
  std::unique_ptr<GraphModel> model;
  try {
    model = make_model(ckpt.spec);
  } catch (const InvalidInput& e) {
    throw DataError(std::string("checkpoint spec is invalid: ") + e.what());
  }
  model->load_parameters(ckpt.parameters);
  return model;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open " + tmp.string() + " for writing");
    f << text;
    if (!f) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace wavegraph
