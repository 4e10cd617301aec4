// strata/net.hpp
//
// Copyright 2026 STRATA authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strata/matrix.hpp"

namespace strata::net {

enum class LayerKind { kDense, kBiLstm, kAttention, kOutput };

const char* layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int input_dim = 0;
  int output_dim = 0;
  bool trainable = true;

  bool operator==(const LayerSpec&) const = default;
};

struct AttentionConfig {
  enum class Variant { kBi, kMaskedSelf };
  Variant variant = Variant::kBi;
  int width = 6;  // frames on each side; the window holds 2*width+1 frames
  int dk = 64;    // query/key projection size
  int dv = 64;    // value projection size

  bool operator==(const AttentionConfig&) const = default;
};

const char* attention_variant_name(AttentionConfig::Variant v);
AttentionConfig::Variant attention_variant_from_name(const std::string& name);

// One layer with whatever parameter tensors its kind uses. Dense and output
// layers use w/b; the BiLSTM uses per-direction w/u/b with gate blocks
// ordered [input, forget, cell, output]; attention uses the q/k/v
// projections.
struct Layer {
  LayerSpec spec;
  Matrix w, b;
  Matrix fwd_w, fwd_u, fwd_b;
  Matrix bwd_w, bwd_u, bwd_b;
  Matrix wq, wk, wv;
};

// Fixed architecture: three dense layers, a BiLSTM, optionally local
// attention, and the output projection feeding a per-frame log-softmax.
struct Model {
  std::vector<Layer> layers;
  AttentionConfig attention;  // meaningful only when an attention layer exists
  int n_classes = 0;
  int lstm_hidden = 0;

  bool has_attention() const;
  int input_dim() const { return layers.empty() ? 0 : layers.front().spec.input_dim; }
};

struct ModelDims {
  int n_inputs = 13;
  int dense_width = 128;
  int lstm_hidden = 128;
  int n_classes = 0;
  std::optional<AttentionConfig> attention;
};

// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1.0.
Model init_model(const ModelDims& dims, uint64_t seed);

// Named view over every parameter tensor, in a fixed order shared by
// Gradients, SGD, checkpoints, and the finite-difference tests.
struct ParamRef {
  std::string name;
  Matrix* tensor;
  int layer_index;
};
struct ConstParamRef {
  std::string name;
  const Matrix* tensor;
  int layer_index;
};
std::vector<ParamRef> param_refs(Model& m);
std::vector<ConstParamRef> param_refs(const Model& m);

// One tensor per parameter tensor, aligned with param_refs order. Frozen
// layers get zero tensors.
struct Gradients {
  std::vector<Matrix> tensors;
};
Gradients zero_gradients(const Model& m);

struct LstmDirCache {
  Matrix gate_i, gate_f, gate_g, gate_o;  // T x h each
  Matrix cell, tanh_cell, hidden;
};

struct ForwardCache {
  std::vector<Matrix> dense_pre;  // pre-activation per dense layer
  std::vector<Matrix> dense_act;  // clipped-ReLU outputs per dense layer
  LstmDirCache fwd, bwd;
  Matrix h_concat;  // T x 2h, rows [h_fwd ; h_bwd]
  Matrix q, k, v;
  Matrix attn_weights;  // T x (2*width+1), column width is the self offset
  Matrix attn_out;      // T x (2h + dv), rows [H(t) ; c_t]
  Matrix logits;
  Matrix probs;
  Matrix logprobs;
};

// Per-frame class log-probabilities, T x n_classes; every row exp-sums
// to one.
Matrix forward(const Model& m, const Matrix& feats);
Matrix forward(const Model& m, const Matrix& feats, ForwardCache* cache);

// Standalone BiLSTM: H[t] = [h_fwd(t) ; h_bwd(t)], T x 2h.
Matrix bilstm_forward(const Layer& lstm, const Matrix& inputs);

// One local-attention step over precomputed states: scaled dot-product
// scores inside the clamped window [t-width, t+width]; the masked variant
// adds -1e9 to strictly-future scores so their weights underflow to exact
// zero (anything below 1e-12 is clamped to zero).
struct AttentionStep {
  std::vector<double> context;  // dv
  std::vector<double> weights;  // over the clamped window, offset order
  int window_lo = 0;
};
AttentionStep local_attention(const Matrix& h_states, int t, const AttentionConfig& cfg,
                              const Matrix& wq, const Matrix& wk, const Matrix& wv);

// Exact reverse-mode gradients of forward() for d(loss)/d(logprobs).
// Frozen layers still propagate upstream gradients but report zeros.
Gradients backward(const Model& m, const Matrix& feats, const Matrix& loss_grads);

// Same, reusing the cache of a forward(m, feats, &cache) call.
Gradients backward_cached(const Model& m, const Matrix& feats, const Matrix& loss_grads,
                          const ForwardCache& cache);

// p <- p - lr * g on trainable layers. Errors on non-finite gradients.
void sgd_step(Model& m, const Gradients& g, double lr);

inline constexpr double kReluClip = 20.0;
inline constexpr double kMaskPenalty = -1e9;
inline constexpr double kWeightClamp = 1e-12;

}  // namespace strata::net
