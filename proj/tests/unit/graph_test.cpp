#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "wavegraph/error.hpp"
#include "wavegraph/graph.hpp"
#include "wavegraph/rng.hpp"

using namespace wavegraph;

namespace {

UGraph path_graph(std::size_t n) {
  UGraph g(n);
  for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

// Random connected graph: random spanning tree plus extra random edges.
UGraph random_connected(std::size_t n, std::size_t extra, Rng& rng) {
  UGraph g(n);
  for (NodeId u = 1; u < n; ++u) g.add_edge(u, rng.below(u));
  for (std::size_t k = 0; k < extra; ++k) {
    const NodeId a = rng.below(n), b = rng.below(n);
    if (a != b && !g.has_edge(a, b)) g.add_edge(a, b);
  }
  return g;
}

std::size_t count_class(const BfsSchedule& s, EdgeClass c) {
  return std::count(s.edge_class.begin(), s.edge_class.end(), c);
}

}  // namespace

TEST_CASE("grid_graph counts") {
  CHECK(grid_graph(1, 1).node_count() == 1);
  CHECK(grid_graph(1, 1).edge_count() == 0);
  CHECK(grid_graph(2, 2).node_count() == 4);
  CHECK(grid_graph(2, 2).edge_count() == 4);
  for (std::size_t n = 1; n <= 6; ++n) CHECK(grid_graph(n, n).edge_count() == 2 * n * (n - 1));
  CHECK_THROWS_AS(grid_graph(0, 3), InvalidInput);
}

TEST_CASE("UGraph rejects malformed edges") {
  UGraph g(3);
  g.add_edge(0, 1);
  CHECK_THROWS_AS(g.add_edge(1, 0), InvalidInput);
  CHECK_THROWS_AS(g.add_edge(2, 2), InvalidInput);
  CHECK_THROWS_AS(g.add_edge(0, 3), InvalidInput);
  CHECK(g.edge_between(1, 0) == 0);
}

TEST_CASE("graph_center examples") {
  CHECK(graph_center(path_graph(3)) == 1);
  CHECK(graph_center(grid_graph(3, 3)) == 4);
  CHECK(graph_center(grid_graph(2, 2)) == 0);
  UGraph split(3);
  split.add_edge(0, 1);
  CHECK_THROWS_AS(graph_center(split), InvalidInput);
}

TEST_CASE("graph_center agrees with all-pairs eccentricities") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_connected(3 + rng.below(15), rng.below(6), rng);
    std::vector<std::size_t> ecc;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      const auto d = hop_distances(g, u);
      ecc.push_back(*std::max_element(d.begin(), d.end()));
    }
    const auto best = std::min_element(ecc.begin(), ecc.end()) - ecc.begin();
    CHECK(graph_center(g) == static_cast<NodeId>(best));
  }
}

TEST_CASE("hop_distances examples") {
  CHECK(hop_distances(path_graph(3), 0) == std::vector<std::size_t>{0, 1, 2});
  CHECK(hop_distances(path_graph(3), 1)[1] == 0);
  const auto d = hop_distances(grid_graph(3, 3), 0);
  CHECK(*std::max_element(d.begin(), d.end()) == 4);
  UGraph split(2);
  CHECK_THROWS_AS(hop_distances(split, 0), InvalidInput);
}

TEST_CASE("bfs_schedule examples") {
  SUBCASE("star rooted at the hub") {
    UGraph star(5);
    for (NodeId leaf = 1; leaf < 5; ++leaf) star.add_edge(0, leaf);
    const auto s = bfs_schedule(star, 0);
    for (NodeId leaf = 1; leaf < 5; ++leaf) CHECK(s.level[leaf] == 1);
    CHECK(count_class(s, EdgeClass::tree) == 4);
    CHECK(count_class(s, EdgeClass::cross) == 0);
  }
  SUBCASE("triangle") {
    UGraph tri(3);
    tri.add_edge(0, 1);
    tri.add_edge(1, 2);
    tri.add_edge(0, 2);
    for (NodeId root = 0; root < 3; ++root) {
      const auto s = bfs_schedule(tri, root);
      CHECK(count_class(s, EdgeClass::tree) == 2);
      CHECK(count_class(s, EdgeClass::cross) == 1);
      for (NodeId u = 0; u < 3; ++u) {
        if (u == root) continue;
        const auto& in = s.forward_incoming[u];
        CHECK(std::count_if(in.begin(), in.end(), [](auto& x) { return x.same_level; }) == 1);
      }
    }
  }
  SUBCASE("3x3 grid rooted at the center") {
    const auto s = bfs_schedule(grid_graph(3, 3), 4);
    REQUIRE(s.levels.size() == 3);
    CHECK(s.levels[0].size() == 1);
    CHECK(s.levels[1].size() == 4);
    CHECK(s.levels[2].size() == 4);
    CHECK(count_class(s, EdgeClass::tree) == 8);
    CHECK(count_class(s, EdgeClass::cross) == 4);
    // Corner 0 has parents 1 and 3 at level 1; the lower id wins.
    CHECK(s.tree_parent[0] == 1);
  }
  SUBCASE("disconnected graphs are rejected") {
    UGraph split(2);
    CHECK_THROWS_AS(bfs_schedule(split, 0), InvalidInput);
  }
}

TEST_CASE("bfs_schedule invariants on random connected graphs") {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.below(30);
    const auto g = random_connected(n, rng.below(2 * n), rng);
    const NodeId root = rng.below(n);
    const auto s = bfs_schedule(g, root);
    CAPTURE(t);

    CHECK(s.level[root] == 0);
    CHECK(count_class(s, EdgeClass::tree) == n - 1);
    for (const auto& e : g.edges()) {
      const auto a = s.level[e.u], b = s.level[e.v];
      CHECK((a > b ? a - b : b - a) <= 1);
    }
    for (std::size_t i = 1; i < n; ++i) CHECK(s.level[s.order[i - 1]] <= s.level[s.order[i]]);

    // Tree edges connect everything without a cycle: n - 1 edges + connected.
    UGraph tree(n);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      if (s.edge_class[e] == EdgeClass::tree) tree.add_edge(g.edges()[e].u, g.edges()[e].v);
    }
    CHECK(tree.is_connected());

    for (NodeId u = 0; u < n; ++u) {
      if (u != root) {
        CHECK(s.level[s.tree_parent[u]] + 1 == s.level[u]);
        const auto& in = s.forward_incoming[u];
        CHECK_FALSE(in.empty());
        CHECK(std::any_of(in.begin(), in.end(),
                          [&](auto& x) { return x.neighbor == s.tree_parent[u]; }));
      }
      std::set<NodeId> fwd_expect, bwd_expect, fwd_got, bwd_got;
      for (const auto& inc : g.neighbors(u)) {
        if (s.level[inc.neighbor] <= s.level[u]) fwd_expect.insert(inc.neighbor);
        if (s.level[inc.neighbor] >= s.level[u]) bwd_expect.insert(inc.neighbor);
      }
      for (const auto& x : s.forward_incoming[u]) {
        fwd_got.insert(x.neighbor);
        CHECK(x.same_level == (s.level[x.neighbor] == s.level[u]));
      }
      for (const auto& x : s.backward_incoming[u]) bwd_got.insert(x.neighbor);
      CHECK(fwd_got == fwd_expect);
      CHECK(bwd_got == bwd_expect);
    }
    CHECK(bfs_schedule(g, root) == s);
  }
}
