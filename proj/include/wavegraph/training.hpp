#pragma once

// Size curriculum and the mini-batch training loop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "wavegraph/adam.hpp"
#include "wavegraph/dataset.hpp"
#include "wavegraph/models.hpp"
#include "wavegraph/rng.hpp"

namespace wavegraph {

inline constexpr double kCurriculumDecay = 0.25;

/// Bin sampling probabilities; bin 0 holds the smallest examples.
class Curriculum {
 public:
  /// All mass on the first bin.
  explicit Curriculum(std::size_t bins, double decay = kCurriculumDecay);
  Curriculum(std::vector<double> probabilities, double decay);

  /// Number of bins taking part in the update: the 1-based index of the
  /// first zero bin, or the bin count when no zero bin remains.
  std::size_t phi() const;
  /// p_i <- p_i * decay + (1 - decay) / phi for the first phi bins.
  void update();
  std::size_t sample(Rng& rng) const;
  double entropy() const;

  const std::vector<double>& probabilities() const { return p_; }
  double decay() const { return decay_; }

 private:
  std::vector<double> p_;
  double decay_;
};

double entropy(std::span<const double> p);

struct TrainConfig {
  TaskKind task = TaskKind::paths;
  ModelSpec model;
  std::size_t iterations = 30000;
  std::size_t batch_size = 50;
  /// Circuits draw the per-size batch size from the circuit table instead.
  bool circuit_batch_table = true;
  double lr = 1e-3;
  std::size_t curriculum_interval = 1500;
  std::size_t log_every = 100;
  std::size_t checkpoint_every = 5000;
  std::uint64_t seed = 0;
};

/// Per-task defaults; callers may still override the model kind, pass count and state sizes.
TrainConfig default_train_config(TaskKind task);

struct LogRow {
  std::size_t iteration = 0;
  /// Mean batch loss since the previous row.
  double loss = 0.0;
  /// Grid size of the last sampled bin.
  std::size_t bin = 0;
  double lr = 0.0;
};

using CheckpointFn = std::function<void(const GraphModel& model, std::size_t iteration, const Rng& rng)>;

struct TrainResult {
  std::unique_ptr<GraphModel> model;
  std::vector<LogRow> log;
  std::vector<double> curriculum;
  std::size_t iterations = 0;
};

/// Examples grouped by size, ascending.
struct SizeBins {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<const Example*>> members;
};
SizeBins bin_by_size(std::span<const Example> data);

/// One batch from the bin chosen by the curriculum. Returns the bin index.
std::size_t sample_batch(const Curriculum& curriculum, const SizeBins& bins, std::size_t batch_size,
                         bool circuit_batch_table, Rng& rng, std::vector<const Example*>& out);

/// Loss of the model on a batch: cross entropy for path tasks, mean squared
/// error for circuits.
Tensor task_loss(TaskKind task, const GraphModel& model, const ExampleBatch& batch);

/// Trains a fresh model. `on_checkpoint` runs every checkpoint_every
/// iterations, at the end, and with the last good parameters before a
/// NumericError is rethrown.
TrainResult train(const TrainConfig& config, std::span<const Example> data, const CheckpointFn& on_checkpoint = {});

}  // namespace wavegraph
