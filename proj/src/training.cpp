#include "wavegraph/training.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "wavegraph/error.hpp"

namespace wavegraph {

namespace {

// Update-to-update entropy may wobble by rounding once the distribution is uniform.
constexpr double kEntropySlack = 1e-12;

}  // namespace

Curriculum::Curriculum(std::size_t bins, double decay) : p_(bins, 0.0), decay_(decay) {
  if (bins == 0) throw InvalidInput("curriculum needs at least one bin");
  p_[0] = 1.0;
}

Curriculum::Curriculum(std::vector<double> probabilities, double decay)
    : p_(std::move(probabilities)), decay_(decay) {
  if (p_.empty()) throw InvalidInput("curriculum needs at least one bin");
  double total = 0.0;
  for (double x : p_) {
    if (!(x >= 0.0)) throw InvalidInput("curriculum probabilities must be non-negative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("curriculum probabilities must sum to 1");
}

std::size_t Curriculum::phi() const {
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (p_[i] == 0.0) return i + 1;
  }
  return p_.size();
}

void Curriculum::update() {
  const std::size_t f = phi();
  const double share = (1.0 - decay_) / static_cast<double>(f);
  for (std::size_t i = 0; i < f; ++i) p_[i] = p_[i] * decay_ + share;
}

std::size_t Curriculum::sample(Rng& rng) const {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (p_[i] == 0.0) continue;
    acc += p_[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double Curriculum::entropy() const { return wavegraph::entropy(p_); }

TrainConfig default_train_config(TaskKind task) {
  TrainConfig c;
  c.task = task;
  c.model.node_feature_width = task_node_feature_width(task);
  c.model.edge_feature_width = task_edge_feature_width(task);
  switch (task) {
    case TaskKind::paths:
    case TaskKind::multipath:
      c.model.state_size = 10;
      break;
    case TaskKind::maze_image:
      c.iterations = 60000;
      c.model.kind = ModelKind::wave_dynamic;
      break;
    case TaskKind::circuits:
      c.model.state_size = 20;
      c.model.cell = CellKind::minigru;
      c.model.head = HeadKind::linear;
      break;
  }
  return c;
}

SizeBins bin_by_size(std::span<const Example> data) {
  std::map<std::size_t, std::vector<const Example*>> grouped;
  for (const auto& ex : data) grouped[ex.size].push_back(&ex);
  SizeBins bins;
  for (auto& [size, members] : grouped) {
    bins.sizes.push_back(size);
    bins.members.push_back(std::move(members));
  }
  return bins;
}

std::size_t sample_batch(const Curriculum& curriculum, const SizeBins& bins, std::size_t batch_size,
                         bool circuit_batch_table, Rng& rng, std::vector<const Example*>& out) {
  if (curriculum.probabilities().size() != bins.sizes.size()) {
    throw InvalidInput("curriculum and dataset disagree on the number of size bins");
  }
  const std::size_t bin = curriculum.sample(rng);
  const auto& members = bins.members[bin];
  if (members.empty()) throw InvalidInput("selected size bin is empty");
  const std::size_t count = circuit_batch_table ? circuit_batch_size(bins.sizes[bin]) : batch_size;
  if (count == 0) throw InvalidInput("batch size must be positive");
  out.clear();
  for (std::size_t i = 0; i < count; ++i) out.push_back(members[rng.below(members.size())]);
  return bin;
}

Tensor task_loss(TaskKind task, const GraphModel& model, const ExampleBatch& batch) {
  const Tensor out = model.forward(batch.graphs);
  return task == TaskKind::circuits ? mse_loss(out, batch.targets, batch.mask)
                                    : bce_loss(out, batch.targets, batch.mask);
}

TrainResult train(const TrainConfig& config, std::span<const Example> data, const CheckpointFn& on_checkpoint) {
  if (config.model.node_feature_width != task_node_feature_width(config.task) ||
      config.model.edge_feature_width != task_edge_feature_width(config.task)) {
    throw InvalidInput("model feature widths do not match the task");
  }
  for (const auto& ex : data) {
    if (ex.task != config.task) throw InvalidInput("dataset contains examples of another task");
  }
  if (config.log_every == 0 || config.curriculum_interval == 0 || config.checkpoint_every == 0) {
    throw InvalidInput("log, curriculum and checkpoint intervals must be positive");
  }

  TrainResult result;
  result.model = make_model(config.model);
  GraphModel& model = *result.model;
  Rng rng(derive_seed(config.seed, 0x747261696e));
  if (config.iterations == 0) {
    if (on_checkpoint) on_checkpoint(model, 0, rng);
    return result;
  }
  if (data.empty()) throw InvalidInput("training needs a non-empty dataset");

  const SizeBins bins = bin_by_size(data);
  Curriculum curriculum(bins.sizes.size());
  AdamConfig adam_config;
  adam_config.learning_rate = config.lr;
  Adam adam(model.parameters(), adam_config);
  const bool per_size = config.circuit_batch_table && config.task == TaskKind::circuits;

  std::vector<const Example*> members;
  double window_loss = 0.0;
  std::size_t window = 0;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const std::size_t bin = sample_batch(curriculum, bins, config.batch_size, per_size, rng, members);
    const ExampleBatch batch = make_example_batch(members);
    Tensor loss = task_loss(config.task, model, batch);
    const double value = loss.item();
    try {
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss at iteration " + std::to_string(it) + " (size " +
                           std::to_string(bins.sizes[bin]) + ")");
      }
      backward(loss);
      adam.step();
    } catch (const NumericError&) {
      // Parameters are untouched by the failed step, so they are the last good ones.
      if (on_checkpoint) on_checkpoint(model, it - 1, rng);
      throw;
    }
    window_loss += value;
    ++window;
    if (it % config.log_every == 0 || it == config.iterations) {
      result.log.push_back({it, window_loss / static_cast<double>(window), bins.sizes[bin], config.lr});
      window_loss = 0.0;
      window = 0;
    }
    if (it % config.curriculum_interval == 0) {
      const double before = curriculum.entropy();
      curriculum.update();
      if (curriculum.entropy() < before - kEntropySlack) {
        throw std::logic_error("curriculum entropy decreased");
      }
    }
    if (on_checkpoint && (it % config.checkpoint_every == 0 || it == config.iterations)) {
      on_checkpoint(model, it, rng);
    }
  }
  result.curriculum = curriculum.probabilities();
  result.iterations = config.iterations;
  return result;
}

}  // namespace wavegraph
