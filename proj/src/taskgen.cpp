#include "wavegraph/taskgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "wavegraph/error.hpp"
#include "wavegraph/rng.hpp"

namespace wavegraph {

std::string_view tree_generator_name(TreeGenerator g) {
  return g == TreeGenerator::dfs ? "dfs" : "prim";
}

TreeGenerator parse_tree_generator(std::string_view name) {
  if (name == "dfs") return TreeGenerator::dfs;
  if (name == "prim") return TreeGenerator::prim;
  throw InvalidInput("unknown generator '" + std::string(name) + "' (expected dfs or prim)");
}

namespace {

void require_grid_size(std::size_t n) {
  if (n < 2) throw InvalidInput("grid size must be at least 2");
}

/// 4-neighbours of a cell in a fixed order (up, left, right, down).
std::vector<NodeId> grid_neighbors(NodeId id, std::size_t n) {
  std::vector<NodeId> out;
  const std::size_t r = id / n, c = id % n;
  if (r > 0) out.push_back(id - n);
  if (c > 0) out.push_back(id - 1);
  if (c + 1 < n) out.push_back(id + 1);
  if (r + 1 < n) out.push_back(id + n);
  return out;
}

UGraph with_empty_features(UGraph g) {
  g.node_features() = FeatureTable(g.node_count(), 0);
  g.edge_features() = FeatureTable(g.edge_count(), 0);
  return g;
}

}  // namespace

UGraph dfs_spanning_tree(std::size_t n, std::uint64_t seed) {
  require_grid_size(n);
  Rng rng(seed);
  UGraph tree(n * n);
  std::vector<bool> visited(n * n, false);
  const NodeId start = rng.below(n * n);
  std::vector<NodeId> stack{start};
  visited[start] = true;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    std::vector<NodeId> open;
    for (NodeId v : grid_neighbors(u, n)) {
      if (!visited[v]) open.push_back(v);
    }
    if (open.empty()) {
      stack.pop_back();
      continue;
    }
    const NodeId v = open[rng.below(open.size())];
    visited[v] = true;
    tree.add_edge(u, v);
    stack.push_back(v);
  }
  return with_empty_features(std::move(tree));
}

UGraph prim_spanning_tree(std::size_t n, std::uint64_t seed) {
  require_grid_size(n);
  Rng rng(seed);
  UGraph tree(n * n);
  std::vector<bool> in_tree(n * n, false);
  std::vector<Edge> frontier;
  auto absorb = [&](NodeId u) {
    in_tree[u] = true;
    for (NodeId v : grid_neighbors(u, n)) {
      if (!in_tree[v]) frontier.push_back({u, v});
    }
  };
  absorb(rng.below(n * n));
  while (!frontier.empty()) {
    const std::size_t pick = rng.below(frontier.size());
    const Edge e = frontier[pick];
    frontier[pick] = frontier.back();
    frontier.pop_back();
    if (in_tree[e.v]) continue;
    tree.add_edge(e.u, e.v);
    absorb(e.v);
  }
  return with_empty_features(std::move(tree));
}

UGraph spanning_tree(TreeGenerator gen, std::size_t n, std::uint64_t seed) {
  return gen == TreeGenerator::dfs ? dfs_spanning_tree(n, seed) : prim_spanning_tree(n, seed);
}

std::vector<NodeId> bfs_path(const UGraph& g, NodeId a, NodeId b) {
  if (a >= g.node_count() || b >= g.node_count()) throw InvalidInput("path endpoint out of range");
  constexpr NodeId kNone = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> prev(g.node_count(), kNone);
  std::deque<NodeId> queue{a};
  prev[a] = a;
  while (!queue.empty() && prev[b] == kNone) {
    const NodeId u = queue.front();
    queue.pop_front();
    std::vector<NodeId> next;
    for (const auto& inc : g.neighbors(u)) next.push_back(inc.neighbor);
    std::sort(next.begin(), next.end());
    for (NodeId v : next) {
      if (prev[v] != kNone) continue;
      prev[v] = u;
      queue.push_back(v);
    }
  }
  if (prev[b] == kNone) throw InvalidInput("no path between the requested nodes");
  std::vector<NodeId> path{b};
  while (path.back() != a) path.push_back(prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::size_t count_shortest_paths(const UGraph& g, NodeId a, NodeId b, std::size_t cap) {
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.node_count(), kUnseen), ways(g.node_count(), 0);
  std::deque<NodeId> queue{a};
  dist[a] = 0;
  ways[a] = 1;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (const auto& inc : g.neighbors(u)) {
      const NodeId v = inc.neighbor;
      if (dist[v] == kUnseen) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
      if (dist[v] == dist[u] + 1) ways[v] = std::min(cap, ways[v] + ways[u]);
    }
  }
  return ways[b];
}

namespace {

/// Whether b is reachable from `from` without entering blocked nodes.
bool reachable_avoiding(const UGraph& g, NodeId from, NodeId b, const std::vector<bool>& blocked,
                        std::vector<bool>& seen) {
  std::fill(seen.begin(), seen.end(), false);
  std::vector<NodeId> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    if (u == b) return true;
    for (const auto& inc : g.neighbors(u)) {
      const NodeId v = inc.neighbor;
      if (!seen[v] && !blocked[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return false;
}

struct PathCounter {
  const UGraph& g;
  NodeId target;
  std::size_t limit;
  std::size_t found = 0;
  std::vector<bool> on_path;
  std::vector<bool> scratch;

  void visit(NodeId u) {
    if (u == target) {
      ++found;
      return;
    }
    on_path[u] = true;
    for (const auto& inc : g.neighbors(u)) {
      if (found >= limit) break;
      const NodeId v = inc.neighbor;
      if (on_path[v]) continue;
      // Dead branches are pruned so work stays proportional to the paths found.
      if (!reachable_avoiding(g, v, target, on_path, scratch)) continue;
      visit(v);
    }
    on_path[u] = false;
  }
};

}  // namespace

std::size_t count_simple_paths(const UGraph& g, NodeId a, NodeId b, std::size_t cap) {
  if (a == b) return 1;
  PathCounter counter{g, b, cap + 1, 0, std::vector<bool>(g.node_count(), false),
                      std::vector<bool>(g.node_count(), false)};
  counter.visit(a);
  return counter.found;
}

namespace {

void require_tree(const UGraph& tree, std::size_t grid_size) {
  if (tree.node_count() != grid_size * grid_size || tree.edge_count() + 1 != tree.node_count() ||
      !tree.is_connected()) {
    throw InvalidInput("expected a spanning tree of the grid");
  }
}

std::pair<NodeId, NodeId> draw_goals(std::size_t n_nodes, Rng& rng) {
  const NodeId a = rng.below(n_nodes);
  NodeId b = rng.below(n_nodes - 1);
  if (b >= a) ++b;
  return {a, b};
}

void label_path_example(PathExample& ex) {
  UGraph& g = ex.graph;
  const std::size_t n = g.node_count();
  g.node_features() = FeatureTable(n, 1);
  g.node_features().row(ex.goal_a)[0] = 1.0;
  g.node_features().row(ex.goal_b)[0] = 1.0;
  g.edge_features() = FeatureTable(g.edge_count(), 0);
  g.node_targets() = FeatureTable(n, 1);
  for (NodeId u : ex.path) g.node_targets().row(u)[0] = 1.0;
  g.target_mask().assign(n, 1);
}

}  // namespace

PathExample make_path_example(const UGraph& tree, TreeGenerator gen, std::size_t grid_size,
                              std::uint64_t seed) {
  require_tree(tree, grid_size);
  Rng rng(seed);
  PathExample ex;
  ex.graph = tree;
  ex.generator = gen;
  ex.grid_size = grid_size;
  std::tie(ex.goal_a, ex.goal_b) = draw_goals(tree.node_count(), rng);
  ex.path = bfs_path(tree, ex.goal_a, ex.goal_b);
  label_path_example(ex);
  return ex;
}

std::optional<PathExample> make_multipath_example(const UGraph& tree, TreeGenerator gen,
                                                  std::size_t grid_size, std::size_t k_extra,
                                                  std::uint64_t seed) {
  require_tree(tree, grid_size);
  Rng rng(seed);
  PathExample ex;
  ex.graph = tree;
  ex.generator = gen;
  ex.grid_size = grid_size;

  std::vector<Edge> candidates;
  const UGraph grid = grid_graph(grid_size, grid_size);
  for (const auto& e : grid.edges()) {
    if (!tree.has_edge(e.u, e.v)) candidates.push_back(e);
  }
  rng.shuffle(std::span<Edge>(candidates));
  const std::size_t k = std::min(k_extra, candidates.size());
  for (std::size_t i = 0; i < k; ++i) ex.graph.add_edge(candidates[i].u, candidates[i].v);
  ex.extra_edges = k;

  std::tie(ex.goal_a, ex.goal_b) = draw_goals(tree.node_count(), rng);
  ex.path_count = count_simple_paths(ex.graph, ex.goal_a, ex.goal_b, kMaxPathCount);
  if (ex.path_count > kMaxPathCount) return std::nullopt;
  if (count_shortest_paths(ex.graph, ex.goal_a, ex.goal_b, 2) != 1) return std::nullopt;
  ex.path = bfs_path(ex.graph, ex.goal_a, ex.goal_b);
  label_path_example(ex);
  return ex;
}

MazeImage rasterize_maze(const PathExample& example) {
  const std::size_t n = example.grid_size;
  require_tree(example.graph, n);
  MazeImage img;
  img.side = 2 * n + 1;
  const std::size_t side = img.side;
  auto cell_pixel = [&](NodeId cell) { return (2 * (cell / n) + 1) * side + 2 * (cell % n) + 1; };
  auto between = [&](NodeId a, NodeId b) { return (cell_pixel(a) + cell_pixel(b)) / 2; };

  img.pixels.assign(side * side, PixelClass::wall);
  for (NodeId cell = 0; cell < n * n; ++cell) img.pixels[cell_pixel(cell)] = PixelClass::passable;
  for (const auto& e : example.graph.edges()) img.pixels[between(e.u, e.v)] = PixelClass::passable;
  img.pixels[cell_pixel(example.goal_a)] = PixelClass::goal;
  img.pixels[cell_pixel(example.goal_b)] = PixelClass::goal;

  img.graph = grid_graph(side, side);
  FeatureTable features(side * side, 3);
  for (std::size_t p = 0; p < side * side; ++p) {
    features.row(p)[static_cast<std::size_t>(img.pixels[p])] = 1.0;
  }
  img.graph.node_features() = std::move(features);
  img.graph.node_targets() = FeatureTable(side * side, 1);
  for (std::size_t i = 0; i < example.path.size(); ++i) {
    img.graph.node_targets().row(cell_pixel(example.path[i]))[0] = 1.0;
    if (i + 1 < example.path.size()) {
      img.graph.node_targets().row(between(example.path[i], example.path[i + 1]))[0] = 1.0;
    }
  }
  img.graph.target_mask().assign(side * side, 1);
  return img;
}

// Circuits.

std::string_view component_kind_name(ComponentKind k) {
  switch (k) {
    case ComponentKind::wire: return "wire";
    case ComponentKind::resistor: return "resistor";
    case ComponentKind::battery: return "battery";
  }
  return "?";
}

ComponentKind parse_component_kind(std::string_view name) {
  if (name == "wire") return ComponentKind::wire;
  if (name == "resistor") return ComponentKind::resistor;
  if (name == "battery") return ComponentKind::battery;
  throw InvalidInput("unknown component kind '" + std::string(name) + "'");
}

void CircuitNetlist::validate() const {
  if (node_count == 0) throw InvalidInput("circuit has no nodes");
  if (ground >= node_count) throw InvalidInput("ground node out of range");
  UGraph g(node_count);
  bool has_battery = false;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    const std::string where = "component " + std::to_string(i) + ": ";
    if (c.a >= node_count || c.b >= node_count) throw InvalidInput(where + "endpoint out of range");
    if (c.a == c.b) throw InvalidInput(where + "self-loop");
    if (!std::isfinite(c.resistance) || !std::isfinite(c.voltage)) {
      throw InvalidInput(where + "non-finite value");
    }
    switch (c.kind) {
      case ComponentKind::wire:
        if (c.resistance != 0.0 || c.voltage != 0.0) throw InvalidInput(where + "wire must be 0 ohm, 0 V");
        break;
      case ComponentKind::resistor:
        if (c.resistance <= 0.0) throw InvalidInput(where + "resistance must be positive");
        if (c.voltage != 0.0) throw InvalidInput(where + "resistor carries no source voltage");
        break;
      case ComponentKind::battery:
        if (c.resistance <= 0.0) throw InvalidInput(where + "battery needs internal resistance");
        if (c.positive != c.a && c.positive != c.b) {
          throw InvalidInput(where + "positive terminal must be an endpoint");
        }
        has_battery = true;
        break;
    }
    if (!g.has_edge(c.a, c.b)) g.add_edge(c.a, c.b);
  }
  if (!has_battery) throw InvalidInput("circuit has no battery");
  if (!g.is_connected()) throw InvalidInput("circuit is not connected");
}

namespace {

struct TableRow {
  std::size_t size;
  double delete_prob;
  std::size_t batch;
};

constexpr std::array<TableRow, 9> kCircuitTable{{{2, 0.1, 100},
                                                 {3, 0.1, 90},
                                                 {4, 0.2, 80},
                                                 {5, 0.2, 70},
                                                 {6, 0.3, 60},
                                                 {7, 0.4, 50},
                                                 {8, 0.5, 40},
                                                 {9, 0.5, 30},
                                                 {10, 0.5, 20}}};

constexpr double kBatteryProb = 0.05;
constexpr double kResistorProb = 0.7;
constexpr std::size_t kMaxCircuitAttempts = 1000;

Component draw_battery(NodeId a, NodeId b, Rng& rng) {
  Component c{a, b, ComponentKind::battery, kBatteryResistance, 0.0, a};
  c.voltage = rng.uniform(5.0, 20.0);
  c.positive = rng.bernoulli(0.5) ? a : b;
  return c;
}

}  // namespace

double circuit_delete_prob(std::size_t n) {
  require_grid_size(n);
  for (const auto& row : kCircuitTable) {
    if (row.size == n) return row.delete_prob;
  }
  return 0.5;
}

std::size_t circuit_batch_size(std::size_t n) {
  for (const auto& row : kCircuitTable) {
    if (row.size == n) return row.batch;
  }
  throw InvalidInput("no training batch size for circuit grid size " + std::to_string(n));
}

CircuitNetlist generate_circuit(std::size_t n, double delete_prob, std::uint64_t seed) {
  require_grid_size(n);
  if (!(delete_prob >= 0.0 && delete_prob < 1.0)) throw InvalidInput("delete probability must be in [0, 1)");
  const UGraph grid = grid_graph(n, n);
  const NodeId ground = n * n - 1;

  for (std::size_t attempt = 0; attempt < kMaxCircuitAttempts; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    std::vector<Component> survivors;
    for (const auto& e : grid.edges()) {
      if (rng.bernoulli(delete_prob)) continue;
      const double u = rng.uniform01();
      if (u < kBatteryProb) {
        survivors.push_back(draw_battery(e.u, e.v, rng));
      } else if (u < kBatteryProb + kResistorProb) {
        survivors.push_back({e.u, e.v, ComponentKind::resistor, rng.uniform(100.0, 1000.0), 0.0, e.u});
      } else {
        survivors.push_back({e.u, e.v, ComponentKind::wire, 0.0, 0.0, e.u});
      }
    }

    // Keep the component of the ground node.
    UGraph g(n * n);
    for (const auto& c : survivors) g.add_edge(c.a, c.b);
    std::vector<bool> keep(n * n, false);
    std::vector<NodeId> stack{ground};
    keep[ground] = true;
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (const auto& inc : g.neighbors(u)) {
        if (!keep[inc.neighbor]) {
          keep[inc.neighbor] = true;
          stack.push_back(inc.neighbor);
        }
      }
    }
    std::vector<NodeId> relabel(n * n, 0);
    std::size_t count = 0;
    for (NodeId u = 0; u < n * n; ++u) {
      if (keep[u]) relabel[u] = count++;
    }
    if (count < 2) continue;

    CircuitNetlist net;
    net.node_count = count;
    net.ground = relabel[ground];
    for (auto c : survivors) {
      if (!keep[c.a]) continue;
      c.a = relabel[c.a];
      c.b = relabel[c.b];
      c.positive = relabel[c.positive];
      net.components.push_back(c);
    }
    const bool has_battery = std::any_of(net.components.begin(), net.components.end(),
                                         [](const Component& c) { return c.kind == ComponentKind::battery; });
    if (!has_battery) {
      auto& c = net.components[rng.below(net.components.size())];
      c = draw_battery(c.a, c.b, rng);
    }
    return net;
  }
  throw DataError("could not generate a connected circuit after " + std::to_string(kMaxCircuitAttempts) +
                  " attempts");
}

UGraph encode_circuit(const CircuitNetlist& net, const std::vector<double>& voltages) {
  net.validate();
  if (voltages.size() != net.node_count) throw InvalidInput("one voltage per node expected");
  UGraph g(net.node_count);
  FeatureTable edge_features(0, 2);
  std::vector<std::size_t> positives(net.node_count, 0);
  for (const auto& c : net.components) {
    g.add_edge(c.a, c.b);
    double r = 0.0, v = 0.0;
    if (c.kind == ComponentKind::resistor) r = std::log1p(c.resistance);
    if (c.kind == ComponentKind::battery) {
      r = std::log1p(kBatteryResistance);
      v = std::log1p(c.voltage);
      ++positives[c.positive];
    }
    const double row[] = {r, v};
    edge_features.push_row(row);
  }
  FeatureTable node_features(net.node_count, 5);
  FeatureTable targets(net.node_count, 1);
  for (NodeId u = 0; u < net.node_count; ++u) {
    auto row = node_features.row(u);
    row[0] = u == net.ground ? 1.0 : 0.0;
    for (std::size_t k = 0; k < 4; ++k) row[1 + k] = positives[u] > k ? 1.0 : 0.0;
    targets.row(u)[0] = voltages[u];
  }
  g.node_features() = std::move(node_features);
  g.edge_features() = std::move(edge_features);
  g.node_targets() = std::move(targets);
  g.target_mask().assign(net.node_count, 1);
  return g;
}

}  // namespace wavegraph
