#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <set>

#include "doctest.h"
#include "wavegraph/error.hpp"
#include "wavegraph/taskgen.hpp"

using namespace wavegraph;

namespace {

bool is_grid_spanning_tree(const UGraph& g, std::size_t n) {
  if (g.node_count() != n * n || g.edge_count() != n * n - 1 || !g.is_connected()) return false;
  for (const auto& e : g.edges()) {
    const std::size_t lo = std::min(e.u, e.v), hi = std::max(e.u, e.v);
    const bool horizontal = hi == lo + 1 && lo / n == hi / n;
    const bool vertical = hi == lo + n;
    if (!horizontal && !vertical) return false;
  }
  return true;
}

/// Tree path by recursive search from a, independent of the BFS helper.
std::vector<NodeId> dfs_tree_path(const UGraph& g, NodeId a, NodeId b) {
  std::vector<NodeId> path;
  std::function<bool(NodeId, NodeId)> go = [&](NodeId u, NodeId from) {
    path.push_back(u);
    if (u == b) return true;
    for (const auto& inc : g.neighbors(u)) {
      if (inc.neighbor != from && go(inc.neighbor, u)) return true;
    }
    path.pop_back();
    return false;
  };
  go(a, static_cast<NodeId>(-1));
  return path;
}

/// Every simple a-b path length, by unpruned exhaustive search.
std::vector<std::size_t> all_path_lengths(const UGraph& g, NodeId a, NodeId b) {
  std::vector<std::size_t> out;
  std::vector<bool> used(g.node_count(), false);
  std::function<void(NodeId, std::size_t)> go = [&](NodeId u, std::size_t len) {
    if (u == b) {
      out.push_back(len);
      return;
    }
    used[u] = true;
    for (const auto& inc : g.neighbors(u)) {
      if (!used[inc.neighbor]) go(inc.neighbor, len + 1);
    }
    used[u] = false;
  };
  go(a, 0);
  return out;
}

double mean_goal_distance(TreeGenerator gen, std::size_t n, std::uint64_t seeds) {
  double total = 0.0;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const auto ex = make_path_example(spanning_tree(gen, n, s), gen, n, s + 7);
    total += static_cast<double>(ex.path.size() - 1);
  }
  return total / static_cast<double>(seeds);
}

double mean_center_depth(TreeGenerator gen, std::size_t n, std::uint64_t seeds) {
  double total = 0.0;
  const NodeId center = (n / 2) * n + n / 2;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const auto d = hop_distances(spanning_tree(gen, n, s), center);
    for (auto x : d) total += static_cast<double>(x);
  }
  return total / static_cast<double>(seeds * n * n);
}

}  // namespace

TEST_CASE("spanning trees cover the grid") {
  for (auto gen : {TreeGenerator::dfs, TreeGenerator::prim}) {
    CHECK(spanning_tree(gen, 2, 0).edge_count() == 3);
    for (std::size_t n = 2; n <= 12; ++n) {
      for (std::uint64_t s = 0; s < 10; ++s) {
        const auto t = spanning_tree(gen, n, s * 31 + n);
        CHECK(is_grid_spanning_tree(t, n));
      }
    }
    CHECK(spanning_tree(gen, 6, 42) == spanning_tree(gen, 6, 42));
    CHECK_THROWS_AS(spanning_tree(gen, 1, 0), InvalidInput);
  }
}

TEST_CASE("DFS trees have longer corridors than Prim trees") {
  const double dfs_len = mean_goal_distance(TreeGenerator::dfs, 10, 500);
  const double prim_len = mean_goal_distance(TreeGenerator::prim, 10, 500);
  CHECK(dfs_len > prim_len);
  const double dfs_depth = mean_center_depth(TreeGenerator::dfs, 10, 500);
  const double prim_depth = mean_center_depth(TreeGenerator::prim, 10, 500);
  CHECK(prim_depth < dfs_depth);
  MESSAGE("mean goal distance dfs " << dfs_len << " prim " << prim_len << "; mean depth from center dfs "
                                    << dfs_depth << " prim " << prim_depth);
}

TEST_CASE("path examples") {
  bool saw_adjacent = false;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto tree = dfs_spanning_tree(5, s);
    const auto ex = make_path_example(tree, TreeGenerator::dfs, 5, s);
    REQUIRE(ex.goal_a != ex.goal_b);
    CHECK(ex.path == dfs_tree_path(tree, ex.goal_a, ex.goal_b));
    for (std::size_t i = 0; i + 1 < ex.path.size(); ++i) CHECK(tree.has_edge(ex.path[i], ex.path[i + 1]));
    if (tree.has_edge(ex.goal_a, ex.goal_b)) {
      saw_adjacent = true;
      CHECK(ex.path == std::vector<NodeId>{ex.goal_a, ex.goal_b});
    }
    std::size_t on_path = 0, goals = 0;
    for (NodeId u = 0; u < 25; ++u) {
      on_path += ex.graph.node_targets().row(u)[0] == 1.0;
      goals += ex.graph.node_features().row(u)[0] == 1.0;
    }
    CHECK(on_path == ex.path.size());
    CHECK(goals == 2);
    CHECK(ex.graph.node_features().row(ex.goal_a)[0] == 1.0);
    CHECK(ex.graph.node_features().row(ex.goal_b)[0] == 1.0);
    ex.graph.validate();
  }
  CHECK(saw_adjacent);
}

TEST_CASE("goal pairs are uniform over distinct pairs") {
  const auto tree = prim_spanning_tree(2, 3);
  std::map<std::pair<NodeId, NodeId>, int> counts;
  const int draws = 60000;
  for (int s = 0; s < draws; ++s) {
    const auto ex = make_path_example(tree, TreeGenerator::prim, 2, static_cast<std::uint64_t>(s));
    counts[{std::min(ex.goal_a, ex.goal_b), std::max(ex.goal_a, ex.goal_b)}]++;
  }
  CHECK(counts.size() == 6);
  for (const auto& [pair, c] : counts) CHECK(std::abs(c / double(draws) - 1.0 / 6.0) < 0.01);
}

TEST_CASE("simple path counting") {
  // 3x3 snake tree: 0-1-2, 2-5, 5-4-3, 3-6, 6-7-8.
  UGraph tree(9);
  for (auto [u, v] : std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}, {2, 5}, {5, 4}, {4, 3}, {3, 6}, {6, 7}, {7, 8}}) {
    tree.add_edge(u, v);
  }
  CHECK(count_simple_paths(tree, 0, 8, 10) == 1);
  UGraph cyc = tree;
  cyc.add_edge(0, 3);  // closes 0-1-2-5-4-3-0
  CHECK(count_simple_paths(cyc, 0, 8, 10) == 2);
  CHECK(count_shortest_paths(cyc, 0, 8) == 1);
  CHECK(bfs_path(cyc, 0, 8) == std::vector<NodeId>{0, 3, 6, 7, 8});
  const auto full = grid_graph(3, 3);
  CHECK(count_simple_paths(full, 0, 8, 1000) == all_path_lengths(full, 0, 8).size());
  CHECK(count_simple_paths(full, 0, 8, 5) == 6);
  CHECK(count_shortest_paths(full, 0, 8) == 6);
}

TEST_CASE("multipath examples") {
  std::size_t emitted = 0;
  std::set<std::size_t> counts_seen;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const std::size_t n = 3 + s % 4;
    const auto tree = dfs_spanning_tree(n, s);
    if (s % 10 == 0) {
      const auto ex = make_multipath_example(tree, TreeGenerator::dfs, n, 0, s);
      REQUIRE(ex);
      CHECK(ex->path_count == 1);
      CHECK(ex->path == dfs_tree_path(tree, ex->goal_a, ex->goal_b));
    }
    const std::size_t k = 1 + s % (3 * n / 2);
    const auto ex = make_multipath_example(tree, TreeGenerator::dfs, n, k, s);
    if (!ex) continue;
    ++emitted;
    counts_seen.insert(ex->path_count);
    CHECK(ex->graph.edge_count() == tree.edge_count() + k);
    const auto lengths = all_path_lengths(ex->graph, ex->goal_a, ex->goal_b);
    CHECK(lengths.size() == ex->path_count);
    CHECK(ex->path_count <= kMaxPathCount);
    const std::size_t target_len = ex->path.size() - 1;
    CHECK(std::count(lengths.begin(), lengths.end(), target_len) == 1);
    for (auto len : lengths) CHECK(target_len <= len);
    for (std::size_t i = 0; i + 1 < ex->path.size(); ++i) CHECK(ex->graph.has_edge(ex->path[i], ex->path[i + 1]));
  }
  CHECK(emitted > 100);
  CHECK(counts_seen.size() >= 5);
}

TEST_CASE("maze rasterization") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const std::size_t n = 2 + s % 6;
    const auto ex = make_path_example(dfs_spanning_tree(n, s), TreeGenerator::dfs, n, s);
    const auto img = rasterize_maze(ex);
    const std::size_t side = 2 * n + 1;
    REQUIRE(img.side == side);
    CHECK(img.graph.node_count() == side * side);
    if (n == 2) CHECK(img.side == 5);
    std::size_t walls = 0, open = 0, goals = 0;
    for (auto p : img.pixels) {
      walls += p == PixelClass::wall;
      open += p == PixelClass::passable;
      goals += p == PixelClass::goal;
    }
    CHECK(goals == 2);
    CHECK(walls + open + goals == side * side);
    // n*n cells plus one opening per tree edge.
    CHECK(open + goals == n * n + (n * n - 1));
    for (std::size_t i = 0; i < side; ++i) {
      CHECK(img.pixels[i] == PixelClass::wall);
      CHECK(img.pixels[(side - 1) * side + i] == PixelClass::wall);
      CHECK(img.pixels[i * side] == PixelClass::wall);
      CHECK(img.pixels[i * side + side - 1] == PixelClass::wall);
    }
    std::vector<NodeId> target;
    for (NodeId p = 0; p < side * side; ++p) {
      const auto f = img.graph.node_features().row(p);
      CHECK(f[0] + f[1] + f[2] == 1.0);
      if (img.graph.node_targets().row(p)[0] == 1.0) {
        target.push_back(p);
        CHECK(img.pixels[p] != PixelClass::wall);
      }
    }
    CHECK(target.size() == 2 * ex.path.size() - 1);
    // BFS over target pixels only must join the two goal pixels.
    const NodeId ga = (2 * (ex.goal_a / n) + 1) * side + 2 * (ex.goal_a % n) + 1;
    const NodeId gb = (2 * (ex.goal_b / n) + 1) * side + 2 * (ex.goal_b % n) + 1;
    CHECK(img.pixels[ga] == PixelClass::goal);
    std::vector<bool> seen(side * side, false);
    std::deque<NodeId> q{ga};
    seen[ga] = true;
    while (!q.empty()) {
      const NodeId u = q.front();
      q.pop_front();
      for (const auto& inc : img.graph.neighbors(u)) {
        const NodeId v = inc.neighbor;
        if (!seen[v] && img.graph.node_targets().row(v)[0] == 1.0) {
          seen[v] = true;
          q.push_back(v);
        }
      }
    }
    CHECK(seen[gb]);
    for (NodeId p : target) CHECK(seen[p]);
  }
}

TEST_CASE("circuit generation") {
  CHECK(circuit_delete_prob(5) == 0.2);
  CHECK(circuit_batch_size(5) == 70);
  CHECK(circuit_delete_prob(2) == 0.1);
  CHECK(circuit_batch_size(10) == 20);
  CHECK(circuit_delete_prob(13) == 0.5);
  CHECK_THROWS_AS(circuit_batch_size(11), InvalidInput);

  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto net = generate_circuit(2, 0.0, s);
    CHECK(net.components.size() == 4);
    CHECK(net.node_count == 4);
    CHECK(net.ground == 3);
    CHECK(std::any_of(net.components.begin(), net.components.end(),
                      [](const Component& c) { return c.kind == ComponentKind::battery; }));
  }
  for (std::uint64_t s = 0; s < 300; ++s) {
    const std::size_t n = 2 + s % 14;
    const auto net = generate_circuit(n, circuit_delete_prob(n), s);
    net.validate();
    CHECK(net.node_count <= n * n);
    for (const auto& c : net.components) {
      switch (c.kind) {
        case ComponentKind::battery:
          CHECK(c.resistance == kBatteryResistance);
          CHECK(c.voltage >= 5.0);
          CHECK(c.voltage <= 20.0);
          break;
        case ComponentKind::resistor:
          CHECK(c.resistance >= 100.0);
          CHECK(c.resistance <= 1000.0);
          break;
        case ComponentKind::wire:
          CHECK(c.resistance == 0.0);
          CHECK(c.voltage == 0.0);
          break;
      }
    }
  }
  CHECK(generate_circuit(7, 0.4, 99) == generate_circuit(7, 0.4, 99));
}

TEST_CASE("circuit kind frequencies") {
  std::size_t counts[3] = {0, 0, 0}, total = 0;
  for (std::uint64_t s = 0; total < 100000; ++s) {
    for (const auto& c : generate_circuit(10, 0.1, s).components) {
      ++counts[static_cast<int>(c.kind)];
      ++total;
    }
  }
  CHECK(std::abs(counts[2] / double(total) - 0.05) < 0.01);
  CHECK(std::abs(counts[1] / double(total) - 0.7) < 0.01);
  CHECK(std::abs(counts[0] / double(total) - 0.25) < 0.01);
}

TEST_CASE("circuit encoding") {
  CircuitNetlist net;
  net.node_count = 4;
  net.ground = 2;
  net.components = {{0, 1, ComponentKind::resistor, 300.0, 0.0, 0},
                    {0, 2, ComponentKind::battery, 100.0, 9.0, 0},
                    {1, 2, ComponentKind::battery, 100.0, 4.0, 2},
                    {3, 0, ComponentKind::battery, 100.0, 5.0, 0},
                    {3, 1, ComponentKind::wire, 0.0, 0.0, 3}};
  const auto g = encode_circuit(net, {1.5, 2.5, 0.0, 3.5});
  CHECK(g.edge_features().row(4)[0] == 0.0);
  CHECK(g.edge_features().row(4)[1] == 0.0);
  CHECK(g.edge_features().row(0)[0] == std::log1p(300.0));
  CHECK(g.edge_features().row(0)[1] == 0.0);
  CHECK(g.edge_features().row(1)[0] == std::log1p(100.0));
  CHECK(g.edge_features().row(1)[1] == std::log1p(9.0));
  // Node 0 carries two positive terminals.
  const auto f0 = g.node_features().row(0);
  CHECK(std::vector<double>(f0.begin(), f0.end()) == std::vector<double>{0, 1, 1, 0, 0});
  const auto f2 = g.node_features().row(2);
  CHECK(std::vector<double>(f2.begin(), f2.end()) == std::vector<double>{1, 1, 0, 0, 0});
  CHECK(g.node_targets().row(2)[0] == 0.0);
  CHECK(g.node_targets().row(3)[0] == 3.5);

  net.components.push_back({0, 1, ComponentKind::resistor, 200.0, 0.0, 0});
  CHECK_THROWS_AS(encode_circuit(net, {1.5, 2.5, 0.0, 3.5}), InvalidInput);
}

TEST_CASE("thermometer saturates at four") {
  CircuitNetlist net;
  net.node_count = 6;
  net.ground = 5;
  for (NodeId v = 1; v <= 5; ++v) net.components.push_back({0, v, ComponentKind::battery, 100.0, 5.0, 0});
  const auto g = encode_circuit(net, std::vector<double>(6, 0.0));
  const auto f0 = g.node_features().row(0);
  CHECK(std::vector<double>(f0.begin(), f0.end()) == std::vector<double>{0, 1, 1, 1, 1});
}
