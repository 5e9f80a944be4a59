#include "wavegraph/batch.hpp"

#include <algorithm>

#include "wavegraph/error.hpp"

namespace wavegraph {
namespace {

void append_level(LevelStep& step, const BfsSchedule& s, std::span<const NodeId> nodes,
                  bool forward, std::size_t node_base, std::size_t edge_base) {
  for (NodeId u : nodes) {
    const std::size_t local = step.targets.size();
    step.targets.push_back(node_base + u);
    const auto& incoming = forward ? s.forward_incoming[u] : s.backward_incoming[u];
    for (const auto& in : incoming) {
      const auto cls = static_cast<std::size_t>(s.edge_class[in.edge]);
      step.edge_target[cls].push_back(local);
      step.edge_source[cls].push_back(node_base + in.neighbor);
      step.edge_id[cls].push_back(edge_base + in.edge);
    }
  }
}

}  // namespace

GraphBatch make_batch(std::span<const UGraph* const> graphs,
                      std::span<const BfsSchedule* const> schedules, std::size_t grid_side) {
  if (graphs.empty()) throw InvalidInput("empty batch");
  if (!schedules.empty() && schedules.size() != graphs.size()) {
    throw InvalidInput("one schedule per graph is required");
  }
  GraphBatch b;
  b.grid_side = grid_side;
  const std::size_t fn = graphs[0]->node_features().width();
  const std::size_t fe = graphs[0]->edge_features().width();
  std::vector<double> nf, ef;
  std::vector<std::size_t> edge_offset;
  for (const UGraph* g : graphs) {
    g->validate();
    if (g->node_features().width() != fn || g->edge_features().width() != fe) {
      throw InvalidInput("batched graphs must share feature widths");
    }
    b.node_offset.push_back(b.node_count);
    edge_offset.push_back(b.edges.size());
    for (const auto& e : g->edges()) b.edges.push_back({e.u + b.node_count, e.v + b.node_count});
    nf.insert(nf.end(), g->node_features().values().begin(), g->node_features().values().end());
    ef.insert(ef.end(), g->edge_features().values().begin(), g->edge_features().values().end());
    b.node_count += g->node_count();
  }
  b.node_features = Tensor({b.node_count, fn}, std::move(nf));
  b.edge_features = Tensor({b.edges.size(), fe}, std::move(ef));

  if (!schedules.empty()) {
    std::size_t depth = 0;
    for (const auto* s : schedules) depth = std::max(depth, s->depth());
    b.plan.forward.resize(depth);
    b.plan.backward.resize(depth);
    for (std::size_t k = 0; k < graphs.size(); ++k) {
      const auto& s = *schedules[k];
      if (s.level.size() != graphs[k]->node_count()) {
        throw InvalidInput("schedule does not belong to its graph");
      }
      for (std::size_t lvl = 0; lvl < s.depth(); ++lvl) {
        append_level(b.plan.forward[lvl], s, s.levels[lvl], true, b.node_offset[k],
                     edge_offset[k]);
        append_level(b.plan.backward[depth - 1 - lvl], s, s.levels[lvl], false,
                     b.node_offset[k], edge_offset[k]);
      }
    }
    // Levels deeper than some members are still visited in mirrored order:
    // the backward list runs from the deepest level of the batch to the root.
  }
  return b;
}

GraphBatch make_batch(const UGraph& g, const BfsSchedule& schedule, std::size_t grid_side) {
  const UGraph* gs[] = {&g};
  const BfsSchedule* ss[] = {&schedule};
  return make_batch(gs, ss, grid_side);
}

}  // namespace wavegraph
