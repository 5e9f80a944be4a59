#pragma once

// Seeded generators for path, multipath, maze-image and circuit examples.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wavegraph/graph.hpp"

namespace wavegraph {

enum class TreeGenerator { dfs, prim };
std::string_view tree_generator_name(TreeGenerator g);
TreeGenerator parse_tree_generator(std::string_view name);

/// Spanning tree of the N x N grid by randomized depth-first search.
UGraph dfs_spanning_tree(std::size_t n, std::uint64_t seed);
/// Spanning tree of the N x N grid by randomized Prim (uniform frontier edge).
UGraph prim_spanning_tree(std::size_t n, std::uint64_t seed);
UGraph spanning_tree(TreeGenerator gen, std::size_t n, std::uint64_t seed);

/// Breadth-first path from a to b, lowest-id predecessor on ties. Throws if unreachable.
std::vector<NodeId> bfs_path(const UGraph& g, NodeId a, NodeId b);

/// Number of distinct shortest a-b paths, saturating at the cap.
std::size_t count_shortest_paths(const UGraph& g, NodeId a, NodeId b, std::size_t cap = 1000);

/// Number of simple a-b paths, or cap + 1 once more than cap exist.
std::size_t count_simple_paths(const UGraph& g, NodeId a, NodeId b, std::size_t cap);

inline constexpr std::size_t kMaxPathCount = 10;

struct PathExample {
  UGraph graph;
  NodeId goal_a = 0;
  NodeId goal_b = 0;
  /// Ordered from goal_a to goal_b.
  std::vector<NodeId> path;
  TreeGenerator generator = TreeGenerator::dfs;
  std::size_t grid_size = 0;
  std::size_t path_count = 1;
  std::size_t extra_edges = 0;
};

/// Goals uniform over distinct pairs; features [is_goal]; targets path membership.
PathExample make_path_example(const UGraph& tree, TreeGenerator gen, std::size_t grid_size,
                              std::uint64_t seed);

/// Adds k_extra grid-adjacent non-tree edges to a tree. Returns nullopt
/// (regenerate) when the shortest goal path is not unique or more than
/// kMaxPathCount simple paths exist.
std::optional<PathExample> make_multipath_example(const UGraph& tree, TreeGenerator gen,
                                                  std::size_t grid_size, std::size_t k_extra,
                                                  std::uint64_t seed);

enum class PixelClass : std::uint8_t { passable = 0, wall = 1, goal = 2 };

struct MazeImage {
  std::size_t side = 0;
  std::vector<PixelClass> pixels;
  /// Pixel grid graph with one-hot class features and path targets.
  UGraph graph;
};

MazeImage rasterize_maze(const PathExample& example);

// Circuits.

enum class ComponentKind : std::uint8_t { wire = 0, resistor = 1, battery = 2 };
std::string_view component_kind_name(ComponentKind k);
ComponentKind parse_component_kind(std::string_view name);

inline constexpr double kBatteryResistance = 100.0;

struct Component {
  NodeId a = 0;
  NodeId b = 0;
  ComponentKind kind = ComponentKind::wire;
  double resistance = 0.0;
  double voltage = 0.0;
  /// Node receiving the battery's positive terminal (a or b).
  NodeId positive = 0;
  friend bool operator==(const Component&, const Component&) = default;
};

struct CircuitNetlist {
  std::size_t node_count = 0;
  NodeId ground = 0;
  std::vector<Component> components;

  /// Throws InvalidInput on out-of-range endpoints, self-loops, bad values or a disconnected graph.
  void validate() const;
  friend bool operator==(const CircuitNetlist&, const CircuitNetlist&) = default;
};

/// Edge deletion probability for a grid size (0.5 beyond the training sizes).
double circuit_delete_prob(std::size_t n);
/// Training batch size for sizes 2-10.
std::size_t circuit_batch_size(std::size_t n);

/// Random DC circuit on the N x N grid. The circuit is the connected
/// component of the surviving edges that contains the bottom-right ground
/// node, relabelled in grid order.
CircuitNetlist generate_circuit(std::size_t n, double delete_prob, std::uint64_t seed);

/// Graph with [is_ground, 4-wide positive-terminal thermometer] node features,
/// [log(1+R), log(1+V)] edge features and voltage targets.
UGraph encode_circuit(const CircuitNetlist& net, const std::vector<double>& voltages);

}  // namespace wavegraph
