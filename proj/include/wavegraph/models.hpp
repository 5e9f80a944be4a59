#pragma once

// Wave networks, the graph-convolution baseline and their building blocks.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wavegraph/batch.hpp"
#include "wavegraph/layers.hpp"

namespace wavegraph {

/// Gated cell without a read gate:
///   u  = sigmoid(x W1 + s W2 + b1)
///   o  = elu(x W3 + s W4 + b2)
///   s' = (1 - u) * s + u * o
class MiniGruCell {
 public:
  MiniGruCell() = default;
  MiniGruCell(std::size_t input_width, std::size_t state_size, Rng& rng);

  Tensor step(const Tensor& x, const Tensor& s) const;

  std::size_t state_size() const { return w2_.cols(); }
  std::size_t input_width() const { return w1_.rows(); }
  void collect(const std::string& prefix, ParameterList& out) const;

  Tensor w1_, w2_, w3_, w4_, b1_, b2_;
};

/// s' = tanh([s, x] W + b)
class DenseTanhCell {
 public:
  DenseTanhCell() = default;
  DenseTanhCell(std::size_t input_width, std::size_t state_size, Rng& rng);

  Tensor step(const Tensor& x, const Tensor& s) const;
  void collect(const std::string& prefix, ParameterList& out) const;

  DenseLayer layer;
};

enum class CellKind { dense_tanh, minigru };

using RecurrentCell = std::variant<DenseTanhCell, MiniGruCell>;

RecurrentCell make_cell(CellKind kind, std::size_t input_width, std::size_t state_size, Rng& rng);
Tensor cell_step(const RecurrentCell& cell, const Tensor& x, const Tensor& s);

/// Wave message function for a set of receiving nodes.
///
/// For receiving node u with incoming neighbours v (edge class pi):
///   a_v = softmax over v of n1_pi([s_u, e_uv, s_v])   (exp layer, normalized)
///   M_u = b + sum_v w * s_v * a_v + sum_v s_u * softsign-layer n2_pi([s_u, e_uv, s_v])
/// A node with no incoming neighbours receives M_u = b.
class MixNetwork {
 public:
  MixNetwork() = default;
  MixNetwork(std::size_t state_size, std::size_t edge_width, Rng& rng);

  /// Messages for `step.targets` given the current node states [n x d] and
  /// the batch edge features.
  Tensor message(const Tensor& states, const Tensor& edge_features, const LevelStep& step) const;

  /// Normalized n1 weights per incoming edge, rows in tree-then-cross order.
  Tensor attention(const Tensor& states, const Tensor& edge_features,
                   const LevelStep& step) const;

  std::size_t state_size() const { return w_.cols(); }
  void collect(const std::string& prefix, ParameterList& out) const;

  DenseLayer n1[2];
  DenseLayer n2[2];
  Tensor w_;
  Tensor b_;
};

enum class ModelKind { wave, wave_dynamic, gconv };
enum class HeadKind { sigmoid, linear };

std::string_view model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view s);
std::string_view cell_kind_name(CellKind k);
CellKind parse_cell_kind(std::string_view s);
std::string_view head_kind_name(HeadKind k);
HeadKind parse_head_kind(std::string_view s);

struct ModelSpec {
  ModelKind kind = ModelKind::wave;
  /// Sweeps (wave) or convolution passes; ignored by wave_dynamic.
  std::size_t passes = 1;
  std::size_t state_size = 10;
  /// Graph convolution edge state width.
  std::size_t edge_state_size = 5;
  CellKind cell = CellKind::dense_tanh;
  HeadKind head = HeadKind::sigmoid;
  std::size_t node_feature_width = 1;
  std::size_t edge_feature_width = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// ceil((side + 1) / 2): sweeps used by dynamic wave on a side x side grid.
constexpr std::size_t dynamic_pass_count(std::size_t side) { return (side + 2) / 2; }

class GraphModel {
 public:
  virtual ~GraphModel() = default;

  /// Final node states [n x d] of the batch.
  virtual Tensor states(const GraphBatch& batch) const = 0;
  /// Per-node output [n x 1]: probability (sigmoid head) or value (linear head).
  Tensor forward(const GraphBatch& batch) const { return readout(states(batch)); }
  Tensor readout(const Tensor& states) const { return head_.forward(states); }

  const ModelSpec& spec() const { return spec_; }
  ParameterList parameters() const;
  std::size_t parameter_count() const { return wavegraph::parameter_count(parameters()); }
  /// Copy parameter values from `values` by name. Throws DataError on any mismatch.
  void load_parameters(const ParameterList& values);

  const DenseLayer& head() const { return head_; }

 protected:
  explicit GraphModel(const ModelSpec& spec);
  virtual void collect(ParameterList& out) const = 0;

  ModelSpec spec_;
  DenseLayer head_;
};

/// Wave network over a breadth-first schedule. Each sweep runs the backward
/// direction (leaves inward) and then the forward direction (root outward);
/// each node is updated by a recurrent cell from its mix-network message.
class WaveModel final : public GraphModel {
 public:
  explicit WaveModel(const ModelSpec& spec);

  Tensor states(const GraphBatch& batch) const override;
  /// Number of forward-backward sweeps run on `batch`.
  std::size_t sweeps(const GraphBatch& batch) const;

  struct Direction {
    MixNetwork mix;
    RecurrentCell cell;
  };
  struct PassParameters {
    Direction forward;
    Direction backward;
  };

  const std::vector<PassParameters>& pass_parameters() const { return passes_; }
  const DenseLayer& embedding() const { return embed_; }

  /// Sweep over one direction's levels.
  Tensor sweep(Tensor s, const GraphBatch& batch, const std::vector<LevelStep>& levels,
               const Direction& params) const;

 private:
  void collect(ParameterList& out) const override;

  DenseLayer embed_;
  std::vector<PassParameters> passes_;
};

/// Graph convolution with node and edge states, distinct parameters per pass:
///   M_u  = sum_v c1([E_uv, S_v])           S_u'  = R1([S_u, M_u])
///   M_uv = c2([S_u, S_v]) + c2([S_v, S_u])  E_uv' = R2([E_uv, M_uv])
/// with every term computed from the previous pass.
class GraphConvModel final : public GraphModel {
 public:
  explicit GraphConvModel(const ModelSpec& spec);

  Tensor states(const GraphBatch& batch) const override;

  struct PassParameters {
    DenseLayer c1, r1, c2, r2;
  };
  const std::vector<PassParameters>& pass_parameters() const { return passes_; }

 private:
  void collect(ParameterList& out) const override;

  DenseLayer node_embed_;
  DenseLayer edge_embed_;
  std::vector<PassParameters> passes_;
};

std::unique_ptr<GraphModel> make_model(const ModelSpec& spec);

/// Final wave states for a single graph.
Tensor wave_forward(const WaveModel& model, const UGraph& g, const BfsSchedule& schedule,
                    std::size_t grid_side = 0);
Tensor graphconv_forward(const GraphConvModel& model, const UGraph& g);

}  // namespace wavegraph
