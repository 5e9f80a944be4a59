#pragma once

// Undirected attributed graphs and the breadth-first schedule that orders
// wave updates.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wavegraph {

using NodeId = std::size_t;
using EdgeId = std::size_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
};

struct Incidence {
  NodeId neighbor = 0;
  EdgeId edge = 0;
};

/// Row-major table of equal-width float rows.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(std::size_t rows, std::size_t width)
      : width_(width), rows_(rows), values_(rows * width, 0.0) {}
  FeatureTable(std::size_t rows, std::size_t width, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t width() const { return width_; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * width_, width_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * width_, width_}; }
  const std::vector<double>& values() const { return values_; }

  /// Appended rows must match the width (any width is accepted on an empty table).
  void push_row(std::span<const double> values);

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> values_;
};

/// Simple undirected graph with per-node features/targets and per-edge features.
class UGraph {
 public:
  UGraph() = default;
  explicit UGraph(std::size_t n_nodes);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  /// Throws InvalidInput on self-loops, duplicates or out-of-range endpoints.
  EdgeId add_edge(NodeId u, NodeId v);
  bool has_edge(NodeId u, NodeId v) const;
  /// Edge id of {u, v}; throws when absent.
  EdgeId edge_between(NodeId u, NodeId v) const;

  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const Incidence> neighbors(NodeId u) const { return adjacency_[u]; }
  std::size_t degree(NodeId u) const { return adjacency_[u].size(); }

  FeatureTable& node_features() { return node_features_; }
  const FeatureTable& node_features() const { return node_features_; }
  FeatureTable& edge_features() { return edge_features_; }
  const FeatureTable& edge_features() const { return edge_features_; }
  FeatureTable& node_targets() { return node_targets_; }
  const FeatureTable& node_targets() const { return node_targets_; }
  std::vector<std::uint8_t>& target_mask() { return target_mask_; }
  const std::vector<std::uint8_t>& target_mask() const { return target_mask_; }

  /// Checks that attribute tables have one row per node / edge.
  void validate() const;
  bool is_connected() const;

  friend bool operator==(const UGraph& a, const UGraph& b);

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  FeatureTable node_features_;
  FeatureTable edge_features_;
  FeatureTable node_targets_;
  std::vector<std::uint8_t> target_mask_;
};

/// rows x cols 4-neighbourhood grid; node id = r * cols + c. Edges are
/// listed row-major, each node's right edge before its down edge.
UGraph grid_graph(std::size_t rows, std::size_t cols);

/// BFS hop counts from source. Throws InvalidInput if some node is unreachable.
std::vector<std::size_t> hop_distances(const UGraph& g, NodeId source);

/// Node of minimum eccentricity, lowest id on ties. Throws on disconnected graphs.
NodeId graph_center(const UGraph& g);

enum class EdgeClass : std::uint8_t { tree = 0, cross = 1 };

struct ScheduledNeighbor {
  NodeId neighbor = 0;
  EdgeId edge = 0;
  bool same_level = false;
  friend bool operator==(const ScheduledNeighbor&, const ScheduledNeighbor&) = default;
};

/// Breadth-first ordering of a connected graph.
///
/// Levels are hop distances from the root. The tree parent of a node is its
/// lowest-id neighbour one level up; every other edge is a cross edge.
/// forward_incoming(u) lists neighbours at a lower level plus same-level
/// neighbours; backward_incoming(u) lists neighbours at a higher level plus
/// same-level neighbours.
struct BfsSchedule {
  static constexpr NodeId kNoParent = static_cast<NodeId>(-1);

  NodeId root = 0;
  std::vector<std::size_t> level;
  std::vector<NodeId> order;
  std::vector<NodeId> tree_parent;
  std::vector<EdgeClass> edge_class;
  std::vector<std::vector<ScheduledNeighbor>> forward_incoming;
  std::vector<std::vector<ScheduledNeighbor>> backward_incoming;
  /// Nodes of each level in increasing id order.
  std::vector<std::vector<NodeId>> levels;

  std::size_t depth() const { return levels.size(); }
  friend bool operator==(const BfsSchedule&, const BfsSchedule&) = default;
};

BfsSchedule bfs_schedule(const UGraph& g, NodeId root);

/// bfs_schedule rooted at graph_center(g).
BfsSchedule centered_schedule(const UGraph& g);

}  // namespace wavegraph
