#include "wavegraph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include "wavegraph/error.hpp"

namespace wavegraph {

bool argmax_path_correct(const Example& ex, std::span<const double> probs) {
  const UGraph& g = ex.graph;
  if (probs.size() != g.node_count()) throw InvalidInput("one probability per node expected");
  if (ex.path.empty() || ex.path.front() != ex.goal_a || ex.path.back() != ex.goal_b) {
    throw InvalidInput("example has no target path between its goals");
  }
  std::vector<bool> visited(g.node_count(), false);
  NodeId u = ex.goal_a;
  visited[u] = true;
  std::size_t step = 0;
  while (u != ex.goal_b) {
    bool found = false, tie = false;
    NodeId best = 0;
    double best_p = 0.0;
    for (const auto& inc : g.neighbors(u)) {
      const NodeId v = inc.neighbor;
      if (visited[v]) continue;
      if (!found || probs[v] > best_p) {
        best = v;
        best_p = probs[v];
        found = true;
        tie = false;
      } else if (probs[v] == best_p) {
        tie = true;
      }
    }
    if (!found || tie) return false;
    u = best;
    visited[u] = true;
    ++step;
    if (step >= ex.path.size() || ex.path[step] != u) return false;
  }
  return step + 1 == ex.path.size();
}

std::vector<std::vector<double>> predict(const GraphModel& model, std::span<const Example> data,
                                         std::size_t batch_size) {
  if (batch_size == 0) throw InvalidInput("batch size must be positive");
  const NoGradGuard no_grad;
  // Batch members must share a grid side: dynamic wave picks its sweep count from it.
  std::map<std::size_t, std::vector<std::size_t>> by_side;
  for (std::size_t i = 0; i < data.size(); ++i) by_side[data[i].grid_side].push_back(i);
  std::vector<std::vector<double>> out(data.size());
  for (const auto& [side, indices] : by_side) {
    for (std::size_t start = 0; start < indices.size(); start += batch_size) {
      const std::size_t end = std::min(indices.size(), start + batch_size);
      std::vector<const Example*> members;
      for (std::size_t i = start; i < end; ++i) members.push_back(&data[indices[i]]);
      const auto batch = make_example_batch(members);
      const Tensor y = model.forward(batch.graphs);
      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto first = y.values().begin() + static_cast<std::ptrdiff_t>(batch.graphs.node_offset[k]);
        out[indices[start + k]].assign(first, first + static_cast<std::ptrdiff_t>(members[k]->graph.node_count()));
      }
    }
  }
  return out;
}

namespace {

using GroupKey = std::tuple<std::string, std::string, std::size_t>;

GroupKey key_of(const Example& ex) { return {std::string(task_name(ex.task)), ex.generator, ex.size}; }

void check_predictions(std::span<const Example> data, const std::vector<std::vector<double>>& predictions) {
  if (predictions.size() != data.size()) throw InvalidInput("one prediction vector per example expected");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predictions[i].size() != data[i].graph.node_count()) {
      throw InvalidInput("prediction length does not match the example's node count");
    }
  }
}

}  // namespace

std::vector<ReportRow> accuracy_rows(std::span<const Example> data,
                                     const std::vector<std::vector<double>>& predictions) {
  check_predictions(data, predictions);
  std::map<GroupKey, std::pair<std::size_t, std::size_t>> groups;  // correct, total
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& [correct, total] = groups[key_of(data[i])];
    correct += argmax_path_correct(data[i], predictions[i]) ? 1 : 0;
    ++total;
  }
  std::vector<ReportRow> rows;
  for (const auto& [key, counts] : groups) {
    const auto& [task, gen, size] = key;
    rows.push_back({task, gen, size, counts.second, "accuracy",
                    static_cast<double>(counts.first) / static_cast<double>(counts.second)});
  }
  return rows;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("pearson needs two equal series of length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<ReportRow> circuit_error_rows(std::span<const Example> data,
                                          const std::vector<std::vector<double>>& predictions) {
  check_predictions(data, predictions);
  struct Acc {
    std::size_t examples = 0;
    double sq = 0.0;
    std::size_t nodes = 0;
    std::map<std::size_t, std::pair<double, std::size_t>> by_hop;  // abs error sum, count
  };
  std::map<GroupKey, Acc> groups;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Example& ex = data[i];
    if (!ex.netlist) throw InvalidInput("circuit errors need circuit examples");
    Acc& acc = groups[key_of(ex)];
    ++acc.examples;
    const auto hops = hop_distances(ex.graph, ex.netlist->ground);
    for (NodeId u = 0; u < ex.graph.node_count(); ++u) {
      const double err = predictions[i][u] - ex.graph.node_targets().row(u)[0];
      acc.sq += err * err;
      ++acc.nodes;
      auto& bucket = acc.by_hop[hops[u]];
      bucket.first += std::abs(err);
      ++bucket.second;
    }
  }
  std::vector<ReportRow> rows;
  for (const auto& [key, acc] : groups) {
    const auto& [task, gen, size] = key;
    rows.push_back({task, gen, size, acc.examples, "rmse", std::sqrt(acc.sq / static_cast<double>(acc.nodes))});
    std::vector<double> hop, mae;
    for (const auto& [k, bucket] : acc.by_hop) {
      const double m = bucket.first / static_cast<double>(bucket.second);
      rows.push_back({task, gen, size, acc.examples, "mae_hop_" + std::to_string(k), m});
      hop.push_back(static_cast<double>(k));
      mae.push_back(m);
    }
    if (hop.size() >= 2) {
      const double r = pearson(hop, mae);
      if (std::isfinite(r)) rows.push_back({task, gen, size, acc.examples, "mae_hop_pearson", r});
    }
  }
  return rows;
}

EvalReport evaluate(const GraphModel& model, std::span<const Example> data, std::uint64_t seed) {
  EvalReport report;
  report.params = model.parameter_count();
  report.seed = seed;
  if (data.empty()) return report;
  const auto preds = predict(model, data);
  const bool circuits = data.front().task == TaskKind::circuits;
  for (const auto& ex : data) {
    if ((ex.task == TaskKind::circuits) != circuits) throw InvalidInput("dataset mixes circuit and path tasks");
  }
  report.rows = circuits ? circuit_error_rows(data, preds) : accuracy_rows(data, preds);
  return report;
}

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string format_report(const EvalReport& report) {
  auto rows = report.rows;
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.task, a.generator, a.size, a.metric) < std::tie(b.task, b.generator, b.size, b.metric);
  });
  std::string out = "task,generator,size,n,metric,value,params,seed\n";
  for (const auto& r : rows) {
    out += r.task + ',' + r.generator + ',' + std::to_string(r.size) + ',' + std::to_string(r.n) + ',' + r.metric +
           ',' + format_value(r.value) + ',' + std::to_string(report.params) + ',' + std::to_string(report.seed) +
           '\n';
  }
  return out;
}

void emit_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f << format_report(report);
  if (!f) throw DataError("failed writing " + path.string());
}

}  // namespace wavegraph
