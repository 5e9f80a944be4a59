#pragma once

// Task examples, seeded dataset generation and batching.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavegraph/batch.hpp"
#include "wavegraph/graph.hpp"
#include "wavegraph/taskgen.hpp"

namespace wavegraph {

enum class TaskKind { paths, multipath, maze_image, circuits };
std::string_view task_name(TaskKind t);
TaskKind parse_task(std::string_view name);
/// Node / edge feature widths produced by a task's generator.
std::size_t task_node_feature_width(TaskKind t);
std::size_t task_edge_feature_width(TaskKind t);
/// Path tasks are scored by argmax tracing, circuits by voltage error.
bool task_is_path_like(TaskKind t);

/// Generator parameters that, together with (size, seed), fully determine an example.
struct GenParams {
  TaskKind task = TaskKind::paths;
  TreeGenerator generator = TreeGenerator::dfs;
  /// Multipath examples are redrawn until path_count lies in [min_paths, max_paths].
  std::size_t min_paths = 1;
  std::size_t max_paths = kMaxPathCount;
  /// Circuit edge deletion probability; negative selects the per-size table value.
  double delete_prob = -1.0;
  friend bool operator==(const GenParams&, const GenParams&) = default;
};

struct Example {
  TaskKind task = TaskKind::paths;
  /// "dfs" / "prim" for path tasks, "grid" for circuits.
  std::string generator;
  std::size_t size = 0;
  std::uint64_t seed = 0;
  GenParams params;
  UGraph graph;
  /// Side length of the node grid (2N+1 for maze images).
  std::size_t grid_side = 0;
  // Path tasks: goals and the target path in graph node ids.
  NodeId goal_a = 0;
  NodeId goal_b = 0;
  std::vector<NodeId> path;
  std::size_t path_count = 1;
  // Circuits.
  std::optional<CircuitNetlist> netlist;
  /// Breadth-first schedule from the graph center, derived from `graph`.
  BfsSchedule schedule;
};

/// Recomputes the cached schedule; call after editing `graph`.
void refresh_schedule(Example& ex);

/// Deterministic in (params, size, seed).
Example generate_example(const GenParams& params, std::size_t size, std::uint64_t seed);

/// Per-example seeds are derived from (seed, size, index).
std::vector<Example> generate_dataset(const GenParams& params, std::size_t min_size,
                                      std::size_t max_size, std::size_t count_per_size,
                                      std::uint64_t seed);

/// True when regenerating from (params, size, seed) reproduces `ex` exactly.
bool matches_generator(const Example& ex);

struct ExampleBatch {
  GraphBatch graphs;
  Tensor targets;
  Tensor mask;
};

/// Batch of examples with stacked targets and masks. Members must share a
/// grid side.
ExampleBatch make_example_batch(std::span<const Example* const> examples);

}  // namespace wavegraph
