#include "wavegraph/dataset.hpp"

#include <string>

#include "wavegraph/circuit.hpp"
#include "wavegraph/error.hpp"
#include "wavegraph/rng.hpp"

namespace wavegraph {

std::string_view task_name(TaskKind t) {
  switch (t) {
    case TaskKind::paths: return "paths";
    case TaskKind::multipath: return "multipath";
    case TaskKind::maze_image: return "maze-image";
    case TaskKind::circuits: return "circuits";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  if (name == "paths") return TaskKind::paths;
  if (name == "multipath") return TaskKind::multipath;
  if (name == "maze-image") return TaskKind::maze_image;
  if (name == "circuits") return TaskKind::circuits;
  throw InvalidInput("unknown task '" + std::string(name) +
                     "' (expected paths, multipath, maze-image or circuits)");
}

std::size_t task_node_feature_width(TaskKind t) {
  switch (t) {
    case TaskKind::paths:
    case TaskKind::multipath: return 1;
    case TaskKind::maze_image: return 3;
    case TaskKind::circuits: return 5;
  }
  return 0;
}

std::size_t task_edge_feature_width(TaskKind t) { return t == TaskKind::circuits ? 2 : 0; }

bool task_is_path_like(TaskKind t) { return t != TaskKind::circuits; }

void refresh_schedule(Example& ex) { ex.schedule = centered_schedule(ex.graph); }

namespace {

constexpr std::size_t kMaxMultipathAttempts = 20000;

void adopt_path(Example& ex, PathExample&& p) {
  ex.graph = std::move(p.graph);
  ex.goal_a = p.goal_a;
  ex.goal_b = p.goal_b;
  ex.path = std::move(p.path);
  ex.path_count = p.path_count;
}

}  // namespace

Example generate_example(const GenParams& params, std::size_t size, std::uint64_t seed) {
  Example ex;
  ex.task = params.task;
  ex.size = size;
  ex.seed = seed;
  ex.params = params;
  ex.grid_side = size;
  ex.generator = std::string(tree_generator_name(params.generator));
  switch (params.task) {
    case TaskKind::paths: {
      const auto tree = spanning_tree(params.generator, size, derive_seed(seed, 1));
      adopt_path(ex, make_path_example(tree, params.generator, size, derive_seed(seed, 2)));
      break;
    }
    case TaskKind::multipath: {
      if (params.min_paths < 1 || params.min_paths > params.max_paths || params.max_paths > kMaxPathCount) {
        throw InvalidInput("path count range must satisfy 1 <= min <= max <= 10");
      }
      bool done = false;
      for (std::size_t attempt = 0; attempt < kMaxMultipathAttempts && !done; ++attempt) {
        const std::uint64_t s = derive_seed(seed, 3, attempt);
        Rng rng(s);
        const std::size_t k_extra = 1 + rng.below(3 * size / 2);
        const auto tree = spanning_tree(params.generator, size, derive_seed(s, 1));
        auto p = make_multipath_example(tree, params.generator, size, k_extra, derive_seed(s, 2));
        if (p && p->path_count >= params.min_paths && p->path_count <= params.max_paths) {
          adopt_path(ex, std::move(*p));
          done = true;
        }
      }
      if (!done) {
        throw DataError("no multipath example with " + std::to_string(params.min_paths) + "-" +
                        std::to_string(params.max_paths) + " paths at size " + std::to_string(size));
      }
      break;
    }
    case TaskKind::maze_image: {
      const auto tree = spanning_tree(params.generator, size, derive_seed(seed, 1));
      const auto p = make_path_example(tree, params.generator, size, derive_seed(seed, 2));
      auto img = rasterize_maze(p);
      const std::size_t side = img.side;
      auto pixel = [&](NodeId cell) { return (2 * (cell / size) + 1) * side + 2 * (cell % size) + 1; };
      ex.graph = std::move(img.graph);
      ex.grid_side = side;
      ex.goal_a = pixel(p.goal_a);
      ex.goal_b = pixel(p.goal_b);
      for (std::size_t i = 0; i < p.path.size(); ++i) {
        ex.path.push_back(pixel(p.path[i]));
        if (i + 1 < p.path.size()) ex.path.push_back((pixel(p.path[i]) + pixel(p.path[i + 1])) / 2);
      }
      break;
    }
    case TaskKind::circuits: {
      ex.generator = "grid";
      ex.params.generator = TreeGenerator::dfs;  // unused by circuits
      const double d = params.delete_prob < 0.0 ? circuit_delete_prob(size) : params.delete_prob;
      auto net = generate_circuit(size, d, seed);
      ex.graph = encode_circuit(net, solve_dc(net));
      ex.netlist = std::move(net);
      break;
    }
  }
  refresh_schedule(ex);
  return ex;
}

std::vector<Example> generate_dataset(const GenParams& params, std::size_t min_size,
                                      std::size_t max_size, std::size_t count_per_size,
                                      std::uint64_t seed) {
  if (min_size < 2 || min_size > max_size) throw InvalidInput("size range must satisfy 2 <= min <= max");
  std::vector<Example> out;
  out.reserve((max_size - min_size + 1) * count_per_size);
  for (std::size_t size = min_size; size <= max_size; ++size) {
    for (std::size_t i = 0; i < count_per_size; ++i) {
      out.push_back(generate_example(params, size, derive_seed(seed, size, i)));
    }
  }
  return out;
}

bool matches_generator(const Example& ex) {
  const Example fresh = generate_example(ex.params, ex.size, ex.seed);
  return fresh.task == ex.task && fresh.generator == ex.generator && fresh.graph == ex.graph &&
         fresh.grid_side == ex.grid_side && fresh.goal_a == ex.goal_a && fresh.goal_b == ex.goal_b &&
         fresh.path == ex.path && fresh.path_count == ex.path_count && fresh.netlist == ex.netlist;
}

ExampleBatch make_example_batch(std::span<const Example* const> examples) {
  if (examples.empty()) throw InvalidInput("empty batch");
  std::vector<const UGraph*> graphs;
  std::vector<const BfsSchedule*> schedules;
  std::size_t side = 0, nodes = 0;
  for (const auto* ex : examples) {
    graphs.push_back(&ex->graph);
    schedules.push_back(&ex->schedule);
    if (side != 0 && ex->grid_side != side) throw InvalidInput("batch members must share a grid side");
    side = ex->grid_side;
    nodes += ex->graph.node_count();
  }
  ExampleBatch out;
  out.graphs = make_batch(graphs, schedules, side);
  std::vector<double> targets, mask;
  targets.reserve(nodes);
  mask.reserve(nodes);
  for (const auto* ex : examples) {
    const auto& g = ex->graph;
    if (g.node_targets().rows() != g.node_count() || g.node_targets().width() != 1) {
      throw InvalidInput("examples need one scalar target per node");
    }
    for (NodeId u = 0; u < g.node_count(); ++u) {
      targets.push_back(g.node_targets().row(u)[0]);
      mask.push_back(g.target_mask().empty() ? 1.0 : static_cast<double>(g.target_mask()[u]));
    }
  }
  out.targets = Tensor({nodes, 1}, std::move(targets));
  out.mask = Tensor({nodes, 1}, std::move(mask));
  return out;
}

}  // namespace wavegraph
