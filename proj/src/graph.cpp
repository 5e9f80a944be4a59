#include "wavegraph/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <string>

#include "wavegraph/error.hpp"

namespace wavegraph {

FeatureTable::FeatureTable(std::size_t rows, std::size_t width, std::vector<double> values)
    : width_(width), rows_(rows), values_(std::move(values)) {
  if (values_.size() != rows * width) throw InvalidInput("feature table size mismatch");
}

void FeatureTable::push_row(std::span<const double> values) {
  if (rows_ == 0 && values_.empty()) width_ = values.size();
  if (values.size() != width_) throw InvalidInput("feature rows must have uniform width");
  values_.insert(values_.end(), values.begin(), values.end());
  ++rows_;
}

UGraph::UGraph(std::size_t n_nodes) : adjacency_(n_nodes) {}

EdgeId UGraph::add_edge(NodeId u, NodeId v) {
  if (u >= node_count() || v >= node_count()) {
    throw InvalidInput("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") out of range for " + std::to_string(node_count()) + " nodes");
  }
  if (u == v) throw InvalidInput("self-loop at node " + std::to_string(u));
  if (has_edge(u, v)) {
    throw InvalidInput("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
  }
  const EdgeId id = edges_.size();
  edges_.push_back({u, v});
  adjacency_[u].push_back({v, id});
  adjacency_[v].push_back({u, id});
  return id;
}

bool UGraph::has_edge(NodeId u, NodeId v) const {
  if (u >= node_count() || v >= node_count()) return false;
  const auto& a = adjacency_[u].size() <= adjacency_[v].size() ? adjacency_[u] : adjacency_[v];
  const NodeId other = &a == &adjacency_[u] ? v : u;
  return std::any_of(a.begin(), a.end(), [&](const Incidence& i) { return i.neighbor == other; });
}

EdgeId UGraph::edge_between(NodeId u, NodeId v) const {
  if (u < node_count()) {
    for (const auto& inc : adjacency_[u]) {
      if (inc.neighbor == v) return inc.edge;
    }
  }
  throw InvalidInput("no edge between " + std::to_string(u) + " and " + std::to_string(v));
}

void UGraph::validate() const {
  const auto n = node_count();
  if (node_features_.rows() != n && !(n == 0 && node_features_.rows() == 0)) {
    throw InvalidInput("node feature rows do not match node count");
  }
  if (node_targets_.rows() != 0 && node_targets_.rows() != n) {
    throw InvalidInput("node target rows do not match node count");
  }
  if (!target_mask_.empty() && target_mask_.size() != n) {
    throw InvalidInput("target mask length does not match node count");
  }
  if (edge_features_.rows() != edge_count()) {
    throw InvalidInput("edge feature rows do not match edge count");
  }
}

bool UGraph::is_connected() const {
  if (node_count() == 0) return true;
  std::vector<char> seen(node_count(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (const auto& inc : adjacency_[u]) {
      if (!seen[inc.neighbor]) {
        seen[inc.neighbor] = 1;
        ++count;
        stack.push_back(inc.neighbor);
      }
    }
  }
  return count == node_count();
}

bool operator==(const UGraph& a, const UGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  for (std::size_t e = 0; e < a.edge_count(); ++e) {
    if (a.edges_[e].u != b.edges_[e].u || a.edges_[e].v != b.edges_[e].v) return false;
  }
  return a.node_features_ == b.node_features_ && a.edge_features_ == b.edge_features_ &&
         a.node_targets_ == b.node_targets_ && a.target_mask_ == b.target_mask_;
}

UGraph grid_graph(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw InvalidInput("grid dimensions must be positive");
  UGraph g(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const NodeId id = r * cols + c;
      if (c + 1 < cols) g.add_edge(id, id + 1);
      if (r + 1 < rows) g.add_edge(id, id + cols);
    }
  }
  g.edge_features() = FeatureTable(g.edge_count(), 0);
  g.node_features() = FeatureTable(g.node_count(), 0);
  return g;
}

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

std::vector<std::size_t> bfs_levels(const UGraph& g, NodeId source) {
  std::vector<std::size_t> dist(g.node_count(), kUnreached);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (const auto& inc : g.neighbors(u)) {
      if (dist[inc.neighbor] == kUnreached) {
        dist[inc.neighbor] = dist[u] + 1;
        queue.push_back(inc.neighbor);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<std::size_t> hop_distances(const UGraph& g, NodeId source) {
  if (source >= g.node_count()) throw InvalidInput("source node out of range");
  auto dist = bfs_levels(g, source);
  for (std::size_t u = 0; u < dist.size(); ++u) {
    if (dist[u] == kUnreached) {
      throw InvalidInput("graph is disconnected: node " + std::to_string(u) +
                         " unreachable from " + std::to_string(source));
    }
  }
  return dist;
}

NodeId graph_center(const UGraph& g) {
  if (g.node_count() == 0) throw InvalidInput("empty graph has no center");
  NodeId best = 0;
  std::size_t best_ecc = kUnreached;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto dist = hop_distances(g, u);
    const std::size_t ecc = *std::max_element(dist.begin(), dist.end());
    if (ecc < best_ecc) {
      best_ecc = ecc;
      best = u;
    }
  }
  return best;
}

BfsSchedule bfs_schedule(const UGraph& g, NodeId root) {
  BfsSchedule s;
  s.root = root;
  s.level = hop_distances(g, root);
  const std::size_t n = g.node_count();

  s.order.resize(n);
  for (NodeId u = 0; u < n; ++u) s.order[u] = u;
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](NodeId a, NodeId b) { return s.level[a] < s.level[b]; });

  const std::size_t depth = n == 0 ? 0 : s.level[s.order.back()] + 1;
  s.levels.assign(depth, {});
  for (NodeId u : s.order) s.levels[s.level[u]].push_back(u);

  s.tree_parent.assign(n, BfsSchedule::kNoParent);
  s.edge_class.assign(g.edge_count(), EdgeClass::cross);
  for (NodeId u = 0; u < n; ++u) {
    if (u == root) continue;
    NodeId parent = BfsSchedule::kNoParent;
    EdgeId via = 0;
    for (const auto& inc : g.neighbors(u)) {
      if (s.level[inc.neighbor] + 1 == s.level[u] && inc.neighbor < parent) {
        parent = inc.neighbor;
        via = inc.edge;
      }
    }
    s.tree_parent[u] = parent;
    s.edge_class[via] = EdgeClass::tree;
  }

  s.forward_incoming.assign(n, {});
  s.backward_incoming.assign(n, {});
  for (NodeId u = 0; u < n; ++u) {
    for (const auto& inc : g.neighbors(u)) {
      const std::size_t lu = s.level[u];
      const std::size_t lv = s.level[inc.neighbor];
      const bool same = lu == lv;
      if (lv < lu || same) s.forward_incoming[u].push_back({inc.neighbor, inc.edge, same});
      if (lv > lu || same) s.backward_incoming[u].push_back({inc.neighbor, inc.edge, same});
    }
    auto by_id = [](const ScheduledNeighbor& a, const ScheduledNeighbor& b) {
      return a.neighbor < b.neighbor;
    };
    std::sort(s.forward_incoming[u].begin(), s.forward_incoming[u].end(), by_id);
    std::sort(s.backward_incoming[u].begin(), s.backward_incoming[u].end(), by_id);
  }
  return s;
}

BfsSchedule centered_schedule(const UGraph& g) { return bfs_schedule(g, graph_center(g)); }

}  // namespace wavegraph
