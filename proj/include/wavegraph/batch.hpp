#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wavegraph/graph.hpp"
#include "wavegraph/ops.hpp"

namespace wavegraph {

/// One BFS level of a wave sweep over a batch.
///
/// Incoming edges are split by edge class (tree = 0, cross = 1); for each
/// class, edge_target holds the position of the receiving node inside
/// `targets`, edge_source the sending node and edge_id the edge.
struct LevelStep {
  Index targets;
  Index edge_target[2];
  Index edge_source[2];
  Index edge_id[2];

  std::size_t incoming() const { return edge_target[0].size() + edge_target[1].size(); }
};

struct WavePlan {
  std::vector<LevelStep> forward;
  std::vector<LevelStep> backward;
};

/// Disjoint union of graphs, ready for batched model evaluation.
struct GraphBatch {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  Tensor node_features;
  Tensor edge_features;
  /// First node id of each member graph.
  std::vector<std::size_t> node_offset;
  /// Side length (in grid nodes or pixels) that drives the dynamic pass count.
  std::size_t grid_side = 0;
  WavePlan plan;
};

/// Builds the union of `graphs`; `schedules` must be BFS schedules of the
/// same graphs (pass an empty span to skip wave planning).
GraphBatch make_batch(std::span<const UGraph* const> graphs,
                      std::span<const BfsSchedule* const> schedules, std::size_t grid_side);

GraphBatch make_batch(const UGraph& g, const BfsSchedule& schedule, std::size_t grid_side = 0);

}  // namespace wavegraph
