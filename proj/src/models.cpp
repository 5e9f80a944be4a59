#include "wavegraph/models.hpp"

#include <string>

#include "wavegraph/error.hpp"

namespace wavegraph {

// ---------------------------------------------------------------- cells

MiniGruCell::MiniGruCell(std::size_t input_width, std::size_t state_size, Rng& rng)
    : w1_(glorot_uniform(input_width, state_size, rng)),
      w2_(glorot_uniform(state_size, state_size, rng)),
      w3_(glorot_uniform(input_width, state_size, rng)),
      w4_(glorot_uniform(state_size, state_size, rng)),
      b1_(Tensor::zeros({1, state_size}, true)),
      b2_(Tensor::zeros({1, state_size}, true)) {}

Tensor MiniGruCell::step(const Tensor& x, const Tensor& s) const {
  if (x.cols() != input_width() || s.cols() != state_size() || x.rows() != s.rows()) {
    throw InvalidInput("miniGRU input/state width mismatch");
  }
  const auto u = sigmoid(add_row(add(matmul(x, w1_), matmul(s, w2_)), b1_));
  const auto o = elu(add_row(add(matmul(x, w3_), matmul(s, w4_)), b2_));
  return add(mul(one_minus(u), s), mul(u, o));
}

void MiniGruCell::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".w1", w1_});
  out.push_back({prefix + ".w2", w2_});
  out.push_back({prefix + ".b1", b1_});
  out.push_back({prefix + ".w3", w3_});
  out.push_back({prefix + ".w4", w4_});
  out.push_back({prefix + ".b2", b2_});
}

DenseTanhCell::DenseTanhCell(std::size_t input_width, std::size_t state_size, Rng& rng)
    : layer(state_size + input_width, state_size, Activation::tanh, rng) {}

Tensor DenseTanhCell::step(const Tensor& x, const Tensor& s) const {
  const Tensor parts[] = {s, x};
  return layer.forward(concat_cols(parts));
}

void DenseTanhCell::collect(const std::string& prefix, ParameterList& out) const {
  layer.collect(prefix, out);
}

RecurrentCell make_cell(CellKind kind, std::size_t input_width, std::size_t state_size, Rng& rng) {
  if (kind == CellKind::minigru) return MiniGruCell(input_width, state_size, rng);
  return DenseTanhCell(input_width, state_size, rng);
}

Tensor cell_step(const RecurrentCell& cell, const Tensor& x, const Tensor& s) {
  return std::visit([&](const auto& c) { return c.step(x, s); }, cell);
}

namespace {
void collect_cell(const RecurrentCell& cell, const std::string& prefix, ParameterList& out) {
  std::visit([&](const auto& c) { c.collect(prefix, out); }, cell);
}
}  // namespace

// ---------------------------------------------------------------- mix network

MixNetwork::MixNetwork(std::size_t state_size, std::size_t edge_width, Rng& rng) {
  const std::size_t in = 2 * state_size + edge_width;
  for (int c = 0; c < 2; ++c) {
    n1[c] = DenseLayer(in, state_size, Activation::exp, rng);
    n2[c] = DenseLayer(in, state_size, Activation::softsign, rng);
  }
  w_ = glorot_uniform(1, state_size, rng);
  b_ = Tensor::zeros({1, state_size}, true);
}

namespace {

struct MixInputs {
  std::vector<Tensor> z1, z2, su, sv;
  Index dst;
};

MixInputs mix_inputs(const MixNetwork& mix, const Tensor& states, const Tensor& edge_features,
                     const LevelStep& step, bool need_n2) {
  MixInputs in;
  for (std::size_t c = 0; c < 2; ++c) {
    if (step.edge_target[c].empty()) continue;
    Index receivers(step.edge_target[c].size());
    for (std::size_t i = 0; i < receivers.size(); ++i) {
      receivers[i] = step.targets[step.edge_target[c][i]];
    }
    auto su = gather_rows(states, receivers);
    auto sv = gather_rows(states, step.edge_source[c]);
    const Tensor parts[] = {su, gather_rows(edge_features, step.edge_id[c]), sv};
    const auto x = concat_cols(parts);
    in.z1.push_back(mix.n1[c].affine(x));
    if (need_n2) in.z2.push_back(mix.n2[c].forward(x));
    in.su.push_back(std::move(su));
    in.sv.push_back(std::move(sv));
    in.dst.insert(in.dst.end(), step.edge_target[c].begin(), step.edge_target[c].end());
  }
  return in;
}

Tensor stack(const std::vector<Tensor>& parts) {
  return parts.size() == 1 ? parts[0] : concat_rows(parts);
}

}  // namespace

Tensor MixNetwork::message(const Tensor& states, const Tensor& edge_features,
                           const LevelStep& step) const {
  const std::size_t d = state_size();
  if (states.cols() != d) throw InvalidInput("mix network state width mismatch");
  const std::size_t receivers = step.targets.size();
  if (step.incoming() == 0) return add_row(Tensor::zeros({receivers, d}), b_);

  const auto in = mix_inputs(*this, states, edge_features, step, true);
  // exp followed by per-receiver normalization == segment softmax of the
  // pre-activations; the latter cannot overflow.
  const auto a = segment_softmax(stack(in.z1), in.dst, receivers);
  const auto weighted = mul_row(mul(a, stack(in.sv)), w_);
  const auto gated = mul(stack(in.su), stack(in.z2));
  return add_row(scatter_add_rows(add(weighted, gated), in.dst, receivers), b_);
}

Tensor MixNetwork::attention(const Tensor& states, const Tensor& edge_features,
                             const LevelStep& step) const {
  if (step.incoming() == 0) return Tensor::zeros({0, state_size()});
  const auto in = mix_inputs(*this, states, edge_features, step, false);
  return segment_softmax(stack(in.z1), in.dst, step.targets.size());
}

void MixNetwork::collect(const std::string& prefix, ParameterList& out) const {
  n1[0].collect(prefix + ".n1_tree", out);
  n1[1].collect(prefix + ".n1_cross", out);
  n2[0].collect(prefix + ".n2_tree", out);
  n2[1].collect(prefix + ".n2_cross", out);
  out.push_back({prefix + ".w", w_});
  out.push_back({prefix + ".b", b_});
}

// ---------------------------------------------------------------- names

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::wave: return "wave";
    case ModelKind::wave_dynamic: return "wave-dynamic";
    case ModelKind::gconv: return "gconv";
  }
  return "wave";
}

ModelKind parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::wave, ModelKind::wave_dynamic, ModelKind::gconv}) {
    if (model_kind_name(k) == s) return k;
  }
  throw InvalidInput("unknown model kind '" + std::string(s) + "'");
}

std::string_view cell_kind_name(CellKind k) {
  return k == CellKind::minigru ? "minigru" : "dense-tanh";
}

CellKind parse_cell_kind(std::string_view s) {
  if (s == "minigru") return CellKind::minigru;
  if (s == "dense-tanh") return CellKind::dense_tanh;
  throw InvalidInput("unknown cell kind '" + std::string(s) + "'");
}

std::string_view head_kind_name(HeadKind k) { return k == HeadKind::linear ? "linear" : "sigmoid"; }

HeadKind parse_head_kind(std::string_view s) {
  if (s == "linear") return HeadKind::linear;
  if (s == "sigmoid") return HeadKind::sigmoid;
  throw InvalidInput("unknown head kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- base model

namespace {
Rng seeded(const ModelSpec& spec) { return Rng(derive_seed(spec.seed, 0x6d6f64656cULL)); }


DenseLayer make_head(const ModelSpec& spec, Rng& rng) {
  return DenseLayer(spec.state_size, 1,
                    spec.head == HeadKind::sigmoid ? Activation::sigmoid : Activation::identity,
                    rng);
}

}  // namespace

GraphModel::GraphModel(const ModelSpec& spec) : spec_(spec) {
  if (spec.state_size == 0) throw InvalidInput("state size must be positive");
}

ParameterList GraphModel::parameters() const {
  ParameterList out;
  collect(out);
  head_.collect("head", out);
  return out;
}

void GraphModel::load_parameters(const ParameterList& values) {
  auto mine = parameters();
  if (values.size() != mine.size()) {
    throw DataError("checkpoint has " + std::to_string(values.size()) +
                    " parameter arrays, model expects " + std::to_string(mine.size()));
  }
  for (auto& p : mine) {
    const NamedParameter* src = nullptr;
    for (const auto& v : values) {
      if (v.name == p.name) src = &v;
    }
    if (src == nullptr) throw DataError("checkpoint is missing parameter '" + p.name + "'");
    if (src->tensor.shape() != p.tensor.shape()) {
      throw DataError("parameter '" + p.name + "' has the wrong shape");
    }
    auto dst = p.tensor.mutable_values();
    std::copy(src->tensor.values().begin(), src->tensor.values().end(), dst.begin());
  }
}

// ---------------------------------------------------------------- wave

WaveModel::WaveModel(const ModelSpec& spec) : GraphModel(spec) {
  Rng rng = seeded(spec);
  const std::size_t d = spec.state_size;
  embed_ = DenseLayer(spec.node_feature_width, d, Activation::tanh, rng);
  const std::size_t sets = spec.kind == ModelKind::wave_dynamic ? 1 : spec.passes;
  if (sets == 0) throw InvalidInput("wave needs at least one pass");
  for (std::size_t p = 0; p < sets; ++p) {
    PassParameters pp;
    pp.forward.mix = MixNetwork(d, spec.edge_feature_width, rng);
    pp.forward.cell = make_cell(spec.cell, d, d, rng);
    pp.backward.mix = MixNetwork(d, spec.edge_feature_width, rng);
    pp.backward.cell = make_cell(spec.cell, d, d, rng);
    passes_.push_back(std::move(pp));
  }
  head_ = make_head(spec, rng);
}

std::size_t WaveModel::sweeps(const GraphBatch& batch) const {
  if (spec_.kind != ModelKind::wave_dynamic) return spec_.passes;
  if (batch.grid_side == 0) throw InvalidInput("dynamic wave needs the batch grid side");
  return dynamic_pass_count(batch.grid_side);
}

Tensor WaveModel::sweep(Tensor s, const GraphBatch& batch, const std::vector<LevelStep>& levels,
                        const Direction& params) const {
  for (const auto& step : levels) {
    if (step.targets.empty()) continue;
    const auto message = params.mix.message(s, batch.edge_features, step);
    const auto updated = cell_step(params.cell, message, gather_rows(s, step.targets));
    s = replace_rows(s, step.targets, updated);
  }
  return s;
}

Tensor WaveModel::states(const GraphBatch& batch) const {
  if (batch.plan.forward.empty() && batch.node_count > 0) {
    throw InvalidInput("wave needs a batch built with BFS schedules");
  }
  Tensor s = embed_.forward(batch.node_features);
  const std::size_t n = sweeps(batch);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& params = passes_[spec_.kind == ModelKind::wave_dynamic ? 0 : p];
    // Gather inward to the root first, then spread outward, so that a single
    // sweep links every pair of nodes.
    s = sweep(std::move(s), batch, batch.plan.backward, params.backward);
    s = sweep(std::move(s), batch, batch.plan.forward, params.forward);
  }
  return s;
}

void WaveModel::collect(ParameterList& out) const {
  embed_.collect("embed", out);
  for (std::size_t p = 0; p < passes_.size(); ++p) {
    const std::string prefix =
        spec_.kind == ModelKind::wave_dynamic ? "shared" : "pass" + std::to_string(p);
    passes_[p].forward.mix.collect(prefix + ".fwd.mix", out);
    collect_cell(passes_[p].forward.cell, prefix + ".fwd.cell", out);
    passes_[p].backward.mix.collect(prefix + ".bwd.mix", out);
    collect_cell(passes_[p].backward.cell, prefix + ".bwd.cell", out);
  }
}

// ---------------------------------------------------------------- graph convolution

GraphConvModel::GraphConvModel(const ModelSpec& spec) : GraphModel(spec) {
  Rng rng = seeded(spec);
  const std::size_t dn = spec.state_size;
  const std::size_t de = spec.edge_state_size;
  if (de == 0) throw InvalidInput("edge state size must be positive");
  if (spec.passes == 0) throw InvalidInput("graph convolution needs at least one pass");
  node_embed_ = DenseLayer(spec.node_feature_width, dn, Activation::tanh, rng);
  edge_embed_ = DenseLayer(spec.edge_feature_width, de, Activation::tanh, rng);
  for (std::size_t p = 0; p < spec.passes; ++p) {
    PassParameters pp;
    pp.c1 = DenseLayer(de + dn, dn, Activation::elu, rng);
    pp.r1 = DenseLayer(dn + dn, dn, Activation::elu, rng);
    pp.c2 = DenseLayer(dn + dn, de, Activation::elu, rng);
    pp.r2 = DenseLayer(de + de, de, Activation::elu, rng);
    passes_.push_back(std::move(pp));
  }
  head_ = make_head(spec, rng);
}

Tensor GraphConvModel::states(const GraphBatch& batch) const {
  const std::size_t m = batch.edges.size();
  Index eu(m), ev(m), dst(2 * m), src(2 * m), eid(2 * m);
  for (std::size_t e = 0; e < m; ++e) {
    eu[e] = batch.edges[e].u;
    ev[e] = batch.edges[e].v;
    dst[2 * e] = eu[e];
    src[2 * e] = ev[e];
    dst[2 * e + 1] = ev[e];
    src[2 * e + 1] = eu[e];
    eid[2 * e] = eid[2 * e + 1] = e;
  }
  Tensor s = node_embed_.forward(batch.node_features);
  Tensor e = edge_embed_.forward(batch.edge_features);
  for (const auto& pp : passes_) {
    const Tensor msg_in[] = {gather_rows(e, eid), gather_rows(s, src)};
    const auto node_msg = scatter_add_rows(pp.c1.forward(concat_cols(msg_in)), dst, batch.node_count);
    const Tensor node_in[] = {s, node_msg};
    const auto s_next = pp.r1.forward(concat_cols(node_in));

    const auto su = gather_rows(s, eu);
    const auto sv = gather_rows(s, ev);
    const Tensor uv[] = {su, sv};
    const Tensor vu[] = {sv, su};
    const auto edge_msg = add(pp.c2.forward(concat_cols(uv)), pp.c2.forward(concat_cols(vu)));
    const Tensor edge_in[] = {e, edge_msg};
    e = pp.r2.forward(concat_cols(edge_in));
    s = s_next;
  }
  return s;
}

void GraphConvModel::collect(ParameterList& out) const {
  node_embed_.collect("node_embed", out);
  edge_embed_.collect("edge_embed", out);
  for (std::size_t p = 0; p < passes_.size(); ++p) {
    const std::string prefix = "pass" + std::to_string(p);
    passes_[p].c1.collect(prefix + ".c1", out);
    passes_[p].r1.collect(prefix + ".r1", out);
    passes_[p].c2.collect(prefix + ".c2", out);
    passes_[p].r2.collect(prefix + ".r2", out);
  }
}

// ---------------------------------------------------------------- factories

std::unique_ptr<GraphModel> make_model(const ModelSpec& spec) {
  if (spec.kind == ModelKind::gconv) return std::make_unique<GraphConvModel>(spec);
  return std::make_unique<WaveModel>(spec);
}

Tensor wave_forward(const WaveModel& model, const UGraph& g, const BfsSchedule& schedule,
                    std::size_t grid_side) {
  return model.states(make_batch(g, schedule, grid_side));
}

Tensor graphconv_forward(const GraphConvModel& model, const UGraph& g) {
  const UGraph* gs[] = {&g};
  return model.states(make_batch(gs, {}, 0));
}

}  // namespace wavegraph
