#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "wavegraph/error.hpp"
#include "wavegraph/evaluation.hpp"

using namespace wavegraph;

namespace {

std::vector<double> exact_probs(const Example& ex) {
  std::vector<double> p(ex.graph.node_count(), 0.0);
  for (NodeId u : ex.path) p[u] = 1.0;
  return p;
}

/// Whether tracing the target path meets a step with two or more unvisited neighbours.
bool path_has_choice(const Example& ex) {
  std::vector<bool> visited(ex.graph.node_count(), false);
  for (std::size_t i = 0; i + 1 < ex.path.size(); ++i) {
    visited[ex.path[i]] = true;
    std::size_t open = 0;
    for (const auto& inc : ex.graph.neighbors(ex.path[i])) open += !visited[inc.neighbor];
    if (open >= 2) return true;
  }
  return false;
}

/// Model that echoes fixed per-node values, for report plumbing tests.
std::vector<std::vector<double>> oracle_predictions(std::span<const Example> data) {
  std::vector<std::vector<double>> out;
  for (const auto& ex : data) {
    std::vector<double> v;
    for (NodeId u = 0; u < ex.graph.node_count(); ++u) v.push_back(ex.graph.node_targets().row(u)[0]);
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("argmax tracing examples") {
  for (auto task : {TaskKind::paths, TaskKind::multipath, TaskKind::maze_image}) {
    GenParams params;
    params.task = task;
    for (const auto& ex : generate_dataset(params, 3, 6, 10, 3)) {
      CHECK(argmax_path_correct(ex, exact_probs(ex)));
      const std::vector<double> half(ex.graph.node_count(), 0.5);
      CHECK(argmax_path_correct(ex, half) == !path_has_choice(ex));
    }
  }
}

TEST_CASE("a longer valid path in a multipath maze is incorrect") {
  GenParams params;
  params.task = TaskKind::multipath;
  params.min_paths = 2;
  std::size_t checked = 0;
  for (const auto& ex : generate_dataset(params, 4, 5, 20, 8)) {
    // Mark a longer simple path by removing one shortest-path edge.
    UGraph cut(ex.graph.node_count());
    for (const auto& e : ex.graph.edges()) {
      if (!(std::min(e.u, e.v) == std::min(ex.path[0], ex.path[1]) &&
            std::max(e.u, e.v) == std::max(ex.path[0], ex.path[1]))) {
        cut.add_edge(e.u, e.v);
      }
    }
    if (!cut.is_connected()) continue;
    const auto detour = bfs_path(cut, ex.goal_a, ex.goal_b);
    REQUIRE(detour.size() > ex.path.size());
    std::vector<double> p(ex.graph.node_count(), 0.0);
    for (NodeId u : detour) p[u] = 1.0;
    CHECK_FALSE(argmax_path_correct(ex, p));
    ++checked;
  }
  CHECK(checked > 5);
}

TEST_CASE("argmax tracing ignores monotone transforms") {
  GenParams params;
  Rng rng(2);
  for (const auto& ex : generate_dataset(params, 3, 7, 10, 5)) {
    std::vector<double> p(ex.graph.node_count());
    for (NodeId u = 0; u < p.size(); ++u) {
      p[u] = rng.uniform01() * 0.6 + (std::find(ex.path.begin(), ex.path.end(), u) != ex.path.end() ? 0.4 : 0.0);
    }
    std::vector<double> q(p.size()), r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i] = std::pow(p[i], 3.0) * 0.5;
      r[i] = 1.0 / (1.0 + std::exp(-20.0 * (p[i] - 0.3)));
    }
    const bool base = argmax_path_correct(ex, p);
    CHECK(argmax_path_correct(ex, q) == base);
    CHECK(argmax_path_correct(ex, r) == base);
  }
}

TEST_CASE("low cross entropy implies argmax correctness") {
  Rng rng(6);
  for (auto task : {TaskKind::paths, TaskKind::multipath, TaskKind::maze_image}) {
    GenParams params;
    params.task = task;
    for (const auto& ex : generate_dataset(params, 3, 6, 15, 7)) {
      const std::size_t n = ex.graph.node_count();
      // Spread a per-node cross-entropy budget of 0.01 unevenly over the nodes.
      std::vector<double> w(n);
      double total = 0.0;
      for (auto& x : w) total += x = rng.uniform01();
      std::vector<double> p(n);
      const auto target = exact_probs(ex);
      for (std::size_t i = 0; i < n; ++i) {
        const double ce = 0.01 * static_cast<double>(n) * w[i] / total;
        p[i] = target[i] == 1.0 ? std::exp(-ce) : 1.0 - std::exp(-ce);
      }
      CHECK(argmax_path_correct(ex, p));
    }
  }
}

TEST_CASE("accuracy rows") {
  GenParams params;
  const auto data = generate_dataset(params, 3, 5, 4, 1);
  const auto rows = accuracy_rows(data, [&] {
    std::vector<std::vector<double>> out;
    for (const auto& ex : data) out.push_back(exact_probs(ex));
    return out;
  }());
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.value == 1.0);
    CHECK(r.n == 4);
    CHECK(r.metric == "accuracy");
  }
  std::vector<std::vector<double>> flat;
  for (const auto& ex : data) flat.emplace_back(ex.graph.node_count(), 0.5);
  const auto flat_rows = accuracy_rows(data, flat);
  for (const auto& r : flat_rows) {
    std::size_t unforced = 0;
    for (const auto& ex : data) unforced += ex.size == r.size && !path_has_choice(ex);
    CHECK(r.value == static_cast<double>(unforced) / 4.0);
  }
}

TEST_CASE("circuit error rows") {
  GenParams params;
  params.task = TaskKind::circuits;
  const auto data = generate_dataset(params, 2, 6, 5, 2);
  for (const auto& r : circuit_error_rows(data, oracle_predictions(data))) {
    if (r.metric != "mae_hop_pearson") CHECK(r.value == 0.0);
  }
  std::vector<std::vector<double>> zeros;
  for (const auto& ex : data) zeros.emplace_back(ex.graph.node_count(), 0.0);
  const auto rows = circuit_error_rows(data, zeros);
  for (std::size_t size = 2; size <= 6; ++size) {
    double sq = 0.0;
    std::size_t n = 0;
    for (const auto& ex : data) {
      if (ex.size != size) continue;
      for (NodeId u = 0; u < ex.graph.node_count(); ++u) {
        sq += std::pow(ex.graph.node_targets().row(u)[0], 2);
        ++n;
      }
    }
    bool found = false;
    for (const auto& r : rows) {
      if (r.size == size && r.metric == "rmse") {
        found = true;
        CHECK(r.value == doctest::Approx(std::sqrt(sq / n)).epsilon(1e-12));
      }
    }
    CHECK(found);
  }
  // Ground bucket: error is the prediction itself.
  std::vector<std::vector<double>> offset;
  for (const auto& ex : data) offset.emplace_back(ex.graph.node_count(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) offset[i][data[i].netlist->ground] = 0.25;
  for (const auto& r : circuit_error_rows(data, offset)) {
    if (r.metric == "mae_hop_0") CHECK(r.value == 0.25);
  }
}

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1};
  CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(x, z) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), InvalidInput);
}

TEST_CASE("report formatting") {
  EvalReport empty;
  CHECK(format_report(empty) == "task,generator,size,n,metric,value,params,seed\n");
  EvalReport r;
  r.params = 55;
  r.seed = 7;
  r.rows = {{"paths", "prim", 4, 10, "accuracy", 0.123456789},
            {"paths", "dfs", 10, 10, "accuracy", 1.0},
            {"paths", "dfs", 4, 10, "accuracy", 2.0 / 3.0}};
  CHECK(format_report(r) ==
        "task,generator,size,n,metric,value,params,seed\n"
        "paths,dfs,4,10,accuracy,0.666667,55,7\n"
        "paths,dfs,10,10,accuracy,1,55,7\n"
        "paths,prim,4,10,accuracy,0.123457,55,7\n");
  const auto dir = std::filesystem::temp_directory_path() / "wavegraph_report_test";
  std::filesystem::create_directories(dir);
  emit_report(r, dir / "a.csv");
  emit_report(r, dir / "b.csv");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  };
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK_THROWS_AS(emit_report(r, dir / "missing" / "x.csv"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("evaluate on models") {
  GenParams params;
  const auto data = generate_dataset(params, 3, 4, 3, 2);
  ModelSpec spec;
  spec.state_size = 4;
  const auto model = make_model(spec);
  const auto report = evaluate(*model, data, 9);
  CHECK(report.params == model->parameter_count());
  CHECK(report.rows.size() == 2);
  CHECK(format_report(report) == format_report(evaluate(*model, data, 9)));
  CHECK(evaluate(*model, std::span<const Example>(), 0).rows.empty());

  // Batched prediction equals one-at-a-time prediction.
  const auto batched = predict(*model, data, 4);
  const auto single = predict(*model, data, 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t u = 0; u < batched[i].size(); ++u) CHECK(std::abs(batched[i][u] - single[i][u]) <= 1e-14);
  }

  // Mixed maze sizes: each image keeps its own dynamic sweep count.
  const GenParams maze{TaskKind::maze_image, TreeGenerator::dfs};
  const auto mazes = generate_dataset(maze, 2, 4, 2, 3);
  ModelSpec dyn;
  dyn.kind = ModelKind::wave_dynamic;
  dyn.state_size = 4;
  dyn.node_feature_width = task_node_feature_width(TaskKind::maze_image);
  const auto dmodel = make_model(dyn);
  const auto mixed = predict(*dmodel, mazes, 64);
  for (std::size_t i = 0; i < mazes.size(); ++i) {
    const auto alone = predict(*dmodel, std::span<const Example>(&mazes[i], 1), 1);
    for (std::size_t u = 0; u < mixed[i].size(); ++u) CHECK(std::abs(mixed[i][u] - alone[0][u]) <= 1e-14);
  }
}
