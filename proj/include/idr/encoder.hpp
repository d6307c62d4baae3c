#pragma once

// Word-embedding lookup and the stacked bidirectional LSTM sentence encoder.
//
// Each direction is its own stack: layer k of the forward LSTM reads layer
// k-1 of the forward LSTM, never the backward one. Gate rows inside a layer's
// fused weight are ordered input, forget, output, candidate; columns are
// [x_t ; h_{t-1}].

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idr/errors.hpp"
#include "idr/kernel.hpp"
#include "idr/rng.hpp"
#include "idr/tensor.hpp"
#include "idr/tokens.hpp"

namespace idr {

struct EmbeddingTable {
  std::size_t dimension = 0;
  std::unordered_map<std::string, std::vector<float>> entries;
  // Shared vector for out-of-vocabulary tokens; zeros unless set otherwise.
  std::vector<float> oov_vector;

  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dimension(dim), oov_vector(dim, 0.0f) {}

  void insert(std::string token, std::vector<float> vec);
  const std::vector<float>& lookup(const std::string& token) const;
  bool contains(const std::string& token) const { return entries.count(token) != 0; }
};

// GloVe text format: "token v1 v2 ... vd" per line; d comes from the first
// line and is enforced on the rest. Repeated tokens keep their first vector.
EmbeddingTable load_glove(const std::filesystem::path& path);
void save_glove(const EmbeddingTable& table, const std::filesystem::path& path);

std::vector<std::vector<float>> embed_tokens(const TokenSequence& seq, const EmbeddingTable& table);

template <typename Real>
std::vector<std::vector<Real>> embed_tokens_as(const TokenSequence& seq,
                                               const EmbeddingTable& table) {
  if (seq.empty()) throw invalid_argument_error("embed_tokens: empty token sequence");
  std::vector<std::vector<Real>> out;
  out.reserve(seq.size());
  for (const auto& tok : seq) {
    const auto& v = table.lookup(tok);
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

enum class Pooling { concat, max, mean };
enum class Direction { forward = 0, backward = 1 };

std::string_view to_string(Pooling p);
Pooling parse_pooling(std::string_view s);

template <typename Real>
struct LstmLayerParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Tensor<Real> weight;  // 4H x (input_dim + H)
  Tensor<Real> bias;    // 4H

  LstmLayerParams() = default;
  LstmLayerParams(std::size_t in, std::size_t hidden)
      : input_dim(in), hidden_dim(hidden), weight({4 * hidden, in + hidden}), bias({4 * hidden}) {}
};

template <typename Real>
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_layers = 0;
  Real forget_bias = Real(1);
  std::array<std::vector<LstmLayerParams<Real>>, 2> directions;

  LstmParams() = default;
  LstmParams(std::size_t in, std::size_t hidden, std::size_t layers)
      : input_dim(in), hidden_dim(hidden), num_layers(layers) {
    if (in == 0 || hidden == 0 || layers == 0)
      throw invalid_argument_error("LstmParams: dimensions and layer count must be positive");
    for (auto& dir : directions)
      for (std::size_t l = 0; l < layers; ++l) dir.emplace_back(l == 0 ? in : hidden, hidden);
  }

  LstmLayerParams<Real>& layer(Direction d, std::size_t l) {
    return directions[static_cast<int>(d)].at(l);
  }
  const LstmLayerParams<Real>& layer(Direction d, std::size_t l) const {
    return directions[static_cast<int>(d)].at(l);
  }

  // Every gate block gets its own Xavier draw over (in + H) -> H; biases are
  // zero except the forget gate, which starts at forget_bias.
  void initialize(Rng& rng, Real forget_gate_bias = Real(1)) {
    forget_bias = forget_gate_bias;
    for (auto& dir : directions)
      for (auto& p : dir) {
        const std::size_t h = p.hidden_dim, cols = p.input_dim + p.hidden_dim;
        for (std::size_t gate = 0; gate < 4; ++gate) {
          auto block = xavier_init<Real>(static_cast<long>(cols), static_cast<long>(h), rng);
          std::copy(block.values().begin(), block.values().end(),
                    p.weight.values().begin() + gate * h * cols);
        }
        auto b = p.bias.values();
        std::fill(b.begin(), b.end(), Real(0));
        std::fill(b.begin() + h, b.begin() + 2 * h, forget_bias);
      }
  }
};

// Everything one cell step needs for its backward pass.
template <typename Real>
struct CellTrace {
  std::vector<Real> input;  // [x_t ; h_prev]
  std::vector<Real> c_prev;
  std::vector<Real> i, f, o, g;
  std::vector<Real> c, tanh_c, h;
};

template <typename Real>
struct CellGrads {
  std::vector<Real> dx, dh_prev, dc_prev;
};

namespace detail {
template <typename Real>
Real logistic(Real z) {
  return z >= Real(0) ? Real(1) / (Real(1) + std::exp(-z))
                      : std::exp(z) / (Real(1) + std::exp(z));
}
}  // namespace detail

// i, f, o = sigmoid gates; g = tanh candidate; c = f*c_prev + i*g; h = o*tanh(c).
template <typename Real>
CellTrace<Real> lstm_cell(std::span<const Real> x, std::span<const Real> h_prev,
                          std::span<const Real> c_prev, const LstmLayerParams<Real>& p) {
  const std::size_t hd = p.hidden_dim;
  if (x.size() != p.input_dim || h_prev.size() != hd || c_prev.size() != hd)
    throw shape_error("lstm_cell: expected x[" + std::to_string(p.input_dim) + "], h/c[" +
                      std::to_string(hd) + "], got x[" + std::to_string(x.size()) + "], h[" +
                      std::to_string(h_prev.size()) + "], c[" + std::to_string(c_prev.size()) +
                      "]");
  CellTrace<Real> t;
  t.input.reserve(x.size() + hd);
  t.input.insert(t.input.end(), x.begin(), x.end());
  t.input.insert(t.input.end(), h_prev.begin(), h_prev.end());
  t.c_prev.assign(c_prev.begin(), c_prev.end());
  const auto z = affine_forward<Real>(t.input, p.weight, p.bias);
  t.i.resize(hd), t.f.resize(hd), t.o.resize(hd), t.g.resize(hd);
  t.c.resize(hd), t.tanh_c.resize(hd), t.h.resize(hd);
  for (std::size_t k = 0; k < hd; ++k) {
    t.i[k] = detail::logistic(z[k]);
    t.f[k] = detail::logistic(z[hd + k]);
    t.o[k] = detail::logistic(z[2 * hd + k]);
    t.g[k] = std::tanh(z[3 * hd + k]);
    t.c[k] = t.f[k] * c_prev[k] + t.i[k] * t.g[k];
    t.tanh_c[k] = std::tanh(t.c[k]);
    t.h[k] = t.o[k] * t.tanh_c[k];
  }
  return t;
}

// dh and dc are the gradients arriving at h_t and c_t. Parameter gradients
// accumulate into p.
template <typename Real>
CellGrads<Real> lstm_cell_backward(const CellTrace<Real>& t, LstmLayerParams<Real>& p,
                                   std::span<const Real> dh, std::span<const Real> dc,
                                   bool accumulate_params = true) {
  const std::size_t hd = p.hidden_dim;
  std::vector<Real> dz(4 * hd);
  CellGrads<Real> out;
  out.dc_prev.resize(hd);
  for (std::size_t k = 0; k < hd; ++k) {
    const Real dct = dc[k] + dh[k] * t.o[k] * (Real(1) - t.tanh_c[k] * t.tanh_c[k]);
    const Real d_o = dh[k] * t.tanh_c[k];
    const Real d_i = dct * t.g[k];
    const Real d_g = dct * t.i[k];
    const Real d_f = dct * t.c_prev[k];
    out.dc_prev[k] = dct * t.f[k];
    dz[k] = d_i * t.i[k] * (Real(1) - t.i[k]);
    dz[hd + k] = d_f * t.f[k] * (Real(1) - t.f[k]);
    dz[2 * hd + k] = d_o * t.o[k] * (Real(1) - t.o[k]);
    dz[3 * hd + k] = d_g * (Real(1) - t.g[k] * t.g[k]);
  }
  auto d_input = affine_backward<Real>(t.input, p.weight, p.bias, dz, accumulate_params);
  out.dx.assign(d_input.begin(), d_input.begin() + p.input_dim);
  out.dh_prev.assign(d_input.begin() + p.input_dim, d_input.end());
  return out;
}

// Elementwise max or mean over per-position states h_1..h_T. For max, argmax
// (when given) receives the first position holding each coordinate's maximum.
template <typename Real>
std::vector<Real> pool_states(const std::vector<std::vector<Real>>& states, Pooling mode,
                              std::vector<std::size_t>* argmax = nullptr) {
  if (states.empty()) throw invalid_argument_error("pooling: no states");
  if (mode == Pooling::concat) throw invalid_argument_error("pooling: mode must be max or mean");
  const std::size_t T = states.size(), d = states.front().size();
  for (const auto& s : states)
    if (s.size() != d) throw shape_error("pooling: states differ in width");
  std::vector<Real> out(d);
  if (argmax) argmax->assign(d, 0);
  for (std::size_t k = 0; k < d; ++k) {
    if (mode == Pooling::max) {
      std::size_t best = 0;
      for (std::size_t t = 1; t < T; ++t)
        if (states[t][k] > states[best][k]) best = t;
      out[k] = states[best][k];
      if (argmax) (*argmax)[k] = best;
    } else {
      Real acc = 0;
      for (std::size_t t = 0; t < T; ++t) acc += states[t][k];
      out[k] = acc / static_cast<Real>(T);
    }
  }
  return out;
}

// Per-direction, per-layer cell traces in processing order (the backward
// direction processes positions T..1).
template <typename Real>
struct EncoderTrace {
  std::size_t length = 0;
  Pooling pooling = Pooling::concat;
  std::array<std::vector<std::vector<CellTrace<Real>>>, 2> cells;
  // Max pooling: for each output coordinate, the position that supplied it.
  std::vector<std::size_t> argmax;
};

template <typename Real>
class BiLstmEncoder {
 public:
  BiLstmEncoder() = default;
  BiLstmEncoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t layers,
                Pooling pooling = Pooling::concat)
      : params_(input_dim, hidden_dim, layers), pooling_(pooling) {}

  void initialize(Rng& rng, Real forget_bias = Real(1)) { params_.initialize(rng, forget_bias); }

  std::size_t input_dim() const { return params_.input_dim; }
  std::size_t hidden_dim() const { return params_.hidden_dim; }
  std::size_t num_layers() const { return params_.num_layers; }
  std::size_t output_dim() const { return 2 * params_.hidden_dim; }
  Pooling pooling() const { return pooling_; }
  void set_pooling(Pooling p) { pooling_ = p; }

  LstmParams<Real>& params() { return params_; }
  const LstmParams<Real>& params() const { return params_; }

  std::vector<Real> encode(const std::vector<std::vector<Real>>& inputs,
                           EncoderTrace<Real>* trace = nullptr) const {
    return encode_with(inputs, pooling_, trace);
  }

  std::vector<Real> encode_with(const std::vector<std::vector<Real>>& inputs, Pooling pooling,
                                EncoderTrace<Real>* trace = nullptr) const {
    const std::size_t T = inputs.size();
    if (T == 0) throw invalid_argument_error("encoder: empty token sequence");
    const std::size_t hd = hidden_dim();
    std::array<std::vector<std::vector<Real>>, 2> top;
    EncoderTrace<Real> local;
    EncoderTrace<Real>& tr = trace ? *trace : local;
    tr = EncoderTrace<Real>{};
    tr.length = T;
    tr.pooling = pooling;
    for (int d = 0; d < 2; ++d) {
      auto& layers = tr.cells[d];
      layers.resize(num_layers());
      std::vector<std::vector<Real>> seq(T);
      for (std::size_t s = 0; s < T; ++s) seq[s] = inputs[d == 0 ? s : T - 1 - s];
      for (std::size_t l = 0; l < num_layers(); ++l) {
        const auto& p = params_.directions[d][l];
        std::vector<Real> h(hd, Real(0)), c(hd, Real(0));
        auto& steps = layers[l];
        steps.clear();
        steps.reserve(T);
        for (std::size_t s = 0; s < T; ++s) {
          steps.push_back(lstm_cell<Real>(seq[s], h, c, p));
          h = steps.back().h;
          c = steps.back().c;
        }
        for (std::size_t s = 0; s < T; ++s) seq[s] = steps[s].h;
      }
      top[d] = std::move(seq);
    }
    std::vector<Real> out(2 * hd);
    // Position t's backward state sits at processing step T-1-t.
    auto state_at = [&](std::size_t t, std::size_t k) -> Real {
      return k < hd ? top[0][t][k] : top[1][T - 1 - t][k - hd];
    };
    if (pooling == Pooling::concat) {
      for (std::size_t k = 0; k < hd; ++k) {
        out[k] = top[0][T - 1][k];
        out[hd + k] = top[1][T - 1][k];
      }
    } else {
      std::vector<std::vector<Real>> states(T, std::vector<Real>(2 * hd));
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < 2 * hd; ++k) states[t][k] = state_at(t, k);
      out = pool_states<Real>(states, pooling, &tr.argmax);
    }
    return out;
  }

  // Backpropagates d(loss)/d(representation) through pooling and both stacks,
  // accumulating parameter gradients.
  void backward(const EncoderTrace<Real>& tr, std::span<const Real> d_rep) {
    const std::size_t T = tr.length, hd = hidden_dim();
    if (d_rep.size() != 2 * hd)
      throw shape_error("encoder backward: expected gradient of size " +
                        std::to_string(2 * hd) + ", got " + std::to_string(d_rep.size()));
    // d_top[d][s]: gradient at the top layer's h for processing step s.
    std::array<std::vector<std::vector<Real>>, 2> d_top;
    for (auto& d : d_top) d.assign(T, std::vector<Real>(hd, Real(0)));
    auto add_at = [&](std::size_t t, std::size_t k, Real g) {
      if (k < hd)
        d_top[0][t][k] += g;
      else
        d_top[1][T - 1 - t][k - hd] += g;
    };
    switch (tr.pooling) {
      case Pooling::concat:
        for (std::size_t k = 0; k < hd; ++k) {
          d_top[0][T - 1][k] += d_rep[k];
          d_top[1][T - 1][k] += d_rep[hd + k];
        }
        break;
      case Pooling::max:
        for (std::size_t k = 0; k < 2 * hd; ++k) add_at(tr.argmax[k], k, d_rep[k]);
        break;
      case Pooling::mean:
        for (std::size_t k = 0; k < 2 * hd; ++k)
          for (std::size_t t = 0; t < T; ++t) add_at(t, k, d_rep[k] / static_cast<Real>(T));
        break;
    }
    for (int d = 0; d < 2; ++d) {
      auto dh_steps = std::move(d_top[d]);
      for (std::size_t l = num_layers(); l-- > 0;) {
        auto& p = params_.directions[d][l];
        const auto& steps = tr.cells[d][l];
        std::vector<Real> dh_next(hd, Real(0)), dc_next(hd, Real(0));
        std::vector<std::vector<Real>> d_inputs(T);
        for (std::size_t s = T; s-- > 0;) {
          std::vector<Real> dh(hd);
          for (std::size_t k = 0; k < hd; ++k) dh[k] = dh_steps[s][k] + dh_next[k];
          auto g = lstm_cell_backward<Real>(steps[s], p, dh, dc_next);
          dh_next = std::move(g.dh_prev);
          dc_next = std::move(g.dc_prev);
          d_inputs[s] = std::move(g.dx);
        }
        // Layer 0's input gradient would flow into the frozen embeddings.
        if (l > 0) dh_steps = std::move(d_inputs);
      }
    }
  }

  std::vector<Tensor<Real>*> parameters() {
    std::vector<Tensor<Real>*> out;
    for (auto& dir : params_.directions)
      for (auto& p : dir) {
        out.push_back(&p.weight);
        out.push_back(&p.bias);
      }
    return out;
  }

  std::vector<std::pair<std::string, Tensor<Real>*>> named_parameters() {
    std::vector<std::pair<std::string, Tensor<Real>*>> out;
    for (int d = 0; d < 2; ++d)
      for (std::size_t l = 0; l < num_layers(); ++l) {
        const std::string stem =
            std::string("lstm.") + (d == 0 ? "fwd" : "bwd") + "." + std::to_string(l);
        out.emplace_back(stem + ".weight", &params_.directions[d][l].weight);
        out.emplace_back(stem + ".bias", &params_.directions[d][l].bias);
      }
    return out;
  }

 private:
  LstmParams<Real> params_;
  Pooling pooling_ = Pooling::concat;
};

enum class Provenance { bilstm_concat, bilstm_max, bilstm_mean, pretrained, combined };

struct SentenceRepresentation {
  std::vector<float> values;
  Provenance provenance = Provenance::pretrained;

  std::size_t dimension() const { return values.size(); }
};

// [fwd h_T ; bwd h_1] from the top layer of each stack.
SentenceRepresentation encode_concat(const TokenSequence& seq, const EmbeddingTable& table,
                                     const BiLstmEncoder<float>& encoder);

// Elementwise max or mean over h_t = [fwd h_t ; bwd h_t], t = 1..T.
SentenceRepresentation encode_pooled(const TokenSequence& seq, const EmbeddingTable& table,
                                     const BiLstmEncoder<float>& encoder, Pooling mode);

}  // namespace idr
