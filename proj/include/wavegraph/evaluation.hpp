#pragma once

// Path tracing accuracy, circuit voltage errors and CSV reports.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wavegraph/dataset.hpp"
#include "wavegraph/models.hpp"

namespace wavegraph {

struct ReportRow {
  std::string task;
  std::string generator;
  std::size_t size = 0;
  std::size_t n = 0;
  std::string metric;
  double value = 0.0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::size_t params = 0;
  std::uint64_t seed = 0;
};

/// Greedy trace from goal_a: repeatedly step to the unvisited neighbour of
/// highest probability. Correct iff the trace arrives at goal_b along the
/// example's target path. For trees this is the same as reaching the goal,
/// and for multipath graphs the same as reaching it in the shortest length.
/// A tie for the highest probability counts as failure.
bool argmax_path_correct(const Example& ex, std::span<const double> probs);

/// Per-node model outputs for each example, evaluated in batches without gradients.
std::vector<std::vector<double>> predict(const GraphModel& model, std::span<const Example> data,
                                         std::size_t batch_size = 64);

/// Accuracy rows per (generator, size).
std::vector<ReportRow> accuracy_rows(std::span<const Example> data,
                                     const std::vector<std::vector<double>>& predictions);

/// RMSE per size, MAE per hop distance from ground ("mae_hop_<k>") and the
/// Pearson correlation between hop distance and bucket MAE ("mae_hop_pearson").
std::vector<ReportRow> circuit_error_rows(std::span<const Example> data,
                                          const std::vector<std::vector<double>>& predictions);

/// Accuracy or circuit rows depending on the dataset's task.
EvalReport evaluate(const GraphModel& model, std::span<const Example> data, std::uint64_t seed);

/// Deterministic CSV: header task,generator,size,n,metric,value,params,seed,
/// rows sorted, values with 6 significant digits.
std::string format_report(const EvalReport& report);
/// Throws DataError when the file cannot be written.
void emit_report(const EvalReport& report, const std::filesystem::path& path);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace wavegraph
