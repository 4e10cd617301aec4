// strata/net.cpp
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

#include "strata/net.hpp"

#include <algorithm>
#include <cmath>

#include "strata/error.hpp"
#include "strata/parallel.hpp"
#include "strata/rng.hpp"

namespace strata::net {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clipped_relu(double x) { return std::min(std::max(x, 0.0), kReluClip); }

double clipped_relu_grad(double x) { return x > 0.0 && x < kReluClip ? 1.0 : 0.0; }

// Z = X * W^T + b (bias broadcast over rows).
Matrix dense_pre(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix z = matmul_nt(x, w);
  for (int t = 0; t < z.rows(); ++t) {
    for (int j = 0; j < z.cols(); ++j) z(t, j) += b(j, 0);
  }
  return z;
}

void glorot_fill(Matrix& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / (m.rows() + m.cols()));
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
  }
}

void lstm_dir_forward(const Matrix& w, const Matrix& u, const Matrix& b, const Matrix& x,
                      bool reverse, LstmDirCache& cache) {
  const int t_total = x.rows();
  const int h = u.cols();
  cache.gate_i = Matrix(t_total, h);
  cache.gate_f = Matrix(t_total, h);
  cache.gate_g = Matrix(t_total, h);
  cache.gate_o = Matrix(t_total, h);
  cache.cell = Matrix(t_total, h);
  cache.tanh_cell = Matrix(t_total, h);
  cache.hidden = Matrix(t_total, h);

  std::vector<double> z(4 * h);
  std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0);
  for (int step = 0; step < t_total; ++step) {
    const int t = reverse ? t_total - 1 - step : step;
    for (int j = 0; j < 4 * h; ++j) z[j] = b(j, 0);
    addmv(x.row(t), w, z);
    addmv({h_prev.data(), h_prev.size()}, u, z);
    for (int j = 0; j < h; ++j) {
      const double gi = sigmoid(z[j]);
      const double gf = sigmoid(z[h + j]);
      const double gg = std::tanh(z[2 * h + j]);
      const double go = sigmoid(z[3 * h + j]);
      const double c = gf * c_prev[j] + gi * gg;
      const double tc = std::tanh(c);
      const double hh = go * tc;
      cache.gate_i(t, j) = gi;
      cache.gate_f(t, j) = gf;
      cache.gate_g(t, j) = gg;
      cache.gate_o(t, j) = go;
      cache.cell(t, j) = c;
      cache.tanh_cell(t, j) = tc;
      cache.hidden(t, j) = hh;
      c_prev[j] = c;
      h_prev[j] = hh;
    }
  }
}

// Backpropagation through one LSTM direction. dx accumulates; dw/du/db
// accumulate as well.
void lstm_dir_backward(const Matrix& w, const Matrix& u, const Matrix& x,
                       const LstmDirCache& cache, bool reverse, const Matrix& dh_upstream,
                       Matrix& dw, Matrix& du, Matrix& db, Matrix& dx) {
  const int t_total = x.rows();
  const int h = u.cols();
  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0), dz(4 * h);
  std::vector<double> zero(h, 0.0);

  for (int step = t_total - 1; step >= 0; --step) {
    const int t = reverse ? t_total - 1 - step : step;
    const int t_prev = reverse ? t + 1 : t - 1;
    const bool first = step == 0;
    for (int j = 0; j < h; ++j) {
      const double dh = dh_upstream(t, j) + dh_next[j];
      const double gi = cache.gate_i(t, j);
      const double gf = cache.gate_f(t, j);
      const double gg = cache.gate_g(t, j);
      const double go = cache.gate_o(t, j);
      const double tc = cache.tanh_cell(t, j);
      const double dc = dh * go * (1.0 - tc * tc) + dc_next[j];
      const double c_before = first ? 0.0 : cache.cell(t_prev, j);
      dz[j] = dc * gg * gi * (1.0 - gi);
      dz[h + j] = dc * c_before * gf * (1.0 - gf);
      dz[2 * h + j] = dc * gi * (1.0 - gg * gg);
      dz[3 * h + j] = dh * tc * go * (1.0 - go);
      dc_next[j] = dc * gf;
    }
    const std::span<const double> dz_span{dz.data(), dz.size()};
    add_outer(dz_span, x.row(t), dw);
    add_outer(dz_span, first ? std::span<const double>{zero.data(), zero.size()}
                             : cache.hidden.row(t_prev),
              du);
    for (int j = 0; j < 4 * h; ++j) db(j, 0) += dz[j];
    addmtv(dz_span, w, dx.row(t));
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    addmtv(dz_span, u, {dh_next.data(), dh_next.size()});
  }
}

void softmax_window(std::vector<double>& scores) {
  double best = scores[0];
  for (double s : scores) best = std::max(best, s);
  double denom = 0.0;
  for (double& s : scores) {
    s = std::exp(s - best);
    denom += s;
  }
  for (double& s : scores) {
    s /= denom;
    if (s < kWeightClamp) s = 0.0;
  }
}

int find_layer(const Model& m, LayerKind kind) {
  for (size_t i = 0; i < m.layers.size(); ++i) {
    if (m.layers[i].spec.kind == kind) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kBiLstm:
      return "bilstm";
    case LayerKind::kAttention:
      return "attention";
    case LayerKind::kOutput:
      return "output";
  }
  return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "dense") return LayerKind::kDense;
  if (name == "bilstm") return LayerKind::kBiLstm;
  if (name == "attention") return LayerKind::kAttention;
  if (name == "output") return LayerKind::kOutput;
  fail(Errc::bad_config, "unknown layer kind \"" + name + "\"");
}

const char* attention_variant_name(AttentionConfig::Variant v) {
  return v == AttentionConfig::Variant::kBi ? "bi" : "masked_self";
}

AttentionConfig::Variant attention_variant_from_name(const std::string& name) {
  if (name == "bi") return AttentionConfig::Variant::kBi;
  if (name == "masked_self") return AttentionConfig::Variant::kMaskedSelf;
  fail(Errc::bad_config, "unknown attention variant \"" + name + "\"");
}

bool Model::has_attention() const {
  for (const auto& layer : layers) {
    if (layer.spec.kind == LayerKind::kAttention) return true;
  }
  return false;
}

Model init_model(const ModelDims& dims, uint64_t seed) {
  if (dims.n_inputs <= 0 || dims.dense_width <= 0 || dims.lstm_hidden <= 0 ||
      dims.n_classes < 2) {
    fail(Errc::bad_config, "model dimensions must be positive (and n_classes >= 2)");
  }
  if (dims.attention && (dims.attention->width < 1 || dims.attention->dk < 1 ||
                         dims.attention->dv < 1)) {
    fail(Errc::bad_config, "attention width and projection dims must be positive");
  }

  Model m;
  m.n_classes = dims.n_classes;
  m.lstm_hidden = dims.lstm_hidden;
  if (dims.attention) m.attention = *dims.attention;

  const int h2 = 2 * dims.lstm_hidden;
  auto add = [&](LayerKind kind, int in, int out) {
    Layer layer;
    layer.spec = LayerSpec{kind, in, out, true};
    m.layers.push_back(std::move(layer));
  };
  add(LayerKind::kDense, dims.n_inputs, dims.dense_width);
  add(LayerKind::kDense, dims.dense_width, dims.dense_width);
  add(LayerKind::kDense, dims.dense_width, dims.dense_width);
  add(LayerKind::kBiLstm, dims.dense_width, h2);
  int out_in = h2;
  if (dims.attention) {
    add(LayerKind::kAttention, h2, h2 + dims.attention->dv);
    out_in = h2 + dims.attention->dv;
  }
  add(LayerKind::kOutput, out_in, dims.n_classes);

  Rng rng(seed);
  for (auto& layer : m.layers) {
    switch (layer.spec.kind) {
      case LayerKind::kDense:
      case LayerKind::kOutput:
        layer.w = Matrix(layer.spec.output_dim, layer.spec.input_dim);
        layer.b = Matrix(layer.spec.output_dim, 1);
        glorot_fill(layer.w, rng);
        break;
      case LayerKind::kBiLstm: {
        const int h = dims.lstm_hidden;
        const int d = layer.spec.input_dim;
        layer.fwd_w = Matrix(4 * h, d);
        layer.fwd_u = Matrix(4 * h, h);
        layer.fwd_b = Matrix(4 * h, 1);
        layer.bwd_w = Matrix(4 * h, d);
        layer.bwd_u = Matrix(4 * h, h);
        layer.bwd_b = Matrix(4 * h, 1);
        glorot_fill(layer.fwd_w, rng);
        glorot_fill(layer.fwd_u, rng);
        glorot_fill(layer.bwd_w, rng);
        glorot_fill(layer.bwd_u, rng);
        for (Matrix* b : {&layer.fwd_b, &layer.bwd_b}) {
          for (int j = h; j < 2 * h; ++j) (*b)(j, 0) = 1.0;
        }
        break;
      }
      case LayerKind::kAttention: {
        const int d = layer.spec.input_dim;
        layer.wq = Matrix(m.attention.dk, d);
        layer.wk = Matrix(m.attention.dk, d);
        layer.wv = Matrix(m.attention.dv, d);
        glorot_fill(layer.wq, rng);
        glorot_fill(layer.wk, rng);
        glorot_fill(layer.wv, rng);
        break;
      }
    }
  }
  return m;
}

std::vector<ParamRef> param_refs(Model& m) {
  std::vector<ParamRef> refs;
  for (size_t i = 0; i < m.layers.size(); ++i) {
    Layer& layer = m.layers[i];
    const std::string prefix = "layer" + std::to_string(i) + "/";
    auto push = [&](const char* name, Matrix& tensor) {
      refs.push_back({prefix + name, &tensor, static_cast<int>(i)});
    };
    switch (layer.spec.kind) {
      case LayerKind::kDense:
      case LayerKind::kOutput:
        push("W", layer.w);
        push("b", layer.b);
        break;
      case LayerKind::kBiLstm:
        push("fwd_W", layer.fwd_w);
        push("fwd_U", layer.fwd_u);
        push("fwd_b", layer.fwd_b);
        push("bwd_W", layer.bwd_w);
        push("bwd_U", layer.bwd_u);
        push("bwd_b", layer.bwd_b);
        break;
      case LayerKind::kAttention:
        push("Wq", layer.wq);
        push("Wk", layer.wk);
        push("Wv", layer.wv);
        break;
    }
  }
  return refs;
}

std::vector<ConstParamRef> param_refs(const Model& m) {
  auto refs = param_refs(const_cast<Model&>(m));
  std::vector<ConstParamRef> out;
  out.reserve(refs.size());
  for (auto& r : refs) out.push_back({std::move(r.name), r.tensor, r.layer_index});
  return out;
}

Gradients zero_gradients(const Model& m) {
  Gradients g;
  for (const auto& ref : param_refs(m)) {
    g.tensors.emplace_back(ref.tensor->rows(), ref.tensor->cols());
  }
  return g;
}

Matrix bilstm_forward(const Layer& lstm, const Matrix& inputs) {
  if (lstm.spec.kind != LayerKind::kBiLstm) fail(Errc::bad_config, "layer is not a BiLSTM");
  if (inputs.cols() != lstm.spec.input_dim) {
    fail(Errc::shape_mismatch, "BiLSTM input width mismatch");
  }
  if (inputs.rows() < 1) fail(Errc::shape_mismatch, "BiLSTM needs at least one frame");
  const int h = lstm.fwd_u.cols();
  LstmDirCache fwd, bwd;
  // The two directions are independent; run them side by side.
#pragma omp parallel sections if (par::enabled())
  {
#pragma omp section
    lstm_dir_forward(lstm.fwd_w, lstm.fwd_u, lstm.fwd_b, inputs, false, fwd);
#pragma omp section
    lstm_dir_forward(lstm.bwd_w, lstm.bwd_u, lstm.bwd_b, inputs, true, bwd);
  }
  Matrix h_concat(inputs.rows(), 2 * h);
  for (int t = 0; t < inputs.rows(); ++t) {
    for (int j = 0; j < h; ++j) {
      h_concat(t, j) = fwd.hidden(t, j);
      h_concat(t, h + j) = bwd.hidden(t, j);
    }
  }
  return h_concat;
}

AttentionStep local_attention(const Matrix& h_states, int t, const AttentionConfig& cfg,
                              const Matrix& wq, const Matrix& wk, const Matrix& wv) {
  const int t_total = h_states.rows();
  if (t < 0 || t >= t_total) {
    fail(Errc::shape_mismatch, "attention time step " + std::to_string(t) + " out of range");
  }
  const int lo = std::max(0, t - cfg.width);
  const int hi = std::min(t_total - 1, t + cfg.width);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dk));

  std::vector<double> q(cfg.dk, 0.0);
  addmv(h_states.row(t), wq, {q.data(), q.size()});

  AttentionStep step;
  step.window_lo = lo;
  step.weights.resize(hi - lo + 1);
  std::vector<double> key(cfg.dk);
  for (int j = lo; j <= hi; ++j) {
    std::fill(key.begin(), key.end(), 0.0);
    addmv(h_states.row(j), wk, {key.data(), key.size()});
    double score = dot({q.data(), q.size()}, {key.data(), key.size()}) * scale;
    if (cfg.variant == AttentionConfig::Variant::kMaskedSelf && j > t) score += kMaskPenalty;
    step.weights[j - lo] = score;
  }
  softmax_window(step.weights);

  step.context.assign(cfg.dv, 0.0);
  std::vector<double> value(cfg.dv);
  for (int j = lo; j <= hi; ++j) {
    const double weight = step.weights[j - lo];
    if (weight == 0.0) continue;
    std::fill(value.begin(), value.end(), 0.0);
    addmv(h_states.row(j), wv, {value.data(), value.size()});
    for (int d = 0; d < cfg.dv; ++d) step.context[d] += weight * value[d];
  }
  return step;
}

Matrix forward(const Model& m, const Matrix& feats) { return forward(m, feats, nullptr); }

Matrix forward(const Model& m, const Matrix& feats, ForwardCache* cache) {
  if (m.layers.empty()) fail(Errc::bad_config, "model has no layers");
  if (feats.cols() != m.input_dim()) {
    fail(Errc::shape_mismatch, "feature width " + std::to_string(feats.cols()) +
                                   " does not match model input dim " +
                                   std::to_string(m.input_dim()));
  }
  if (feats.rows() < 1) fail(Errc::shape_mismatch, "need at least one frame");

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.dense_pre.clear();
  c.dense_act.clear();

  const int t_total = feats.rows();
  Matrix current = feats;

  for (const Layer& layer : m.layers) {
    switch (layer.spec.kind) {
      case LayerKind::kDense: {
        Matrix z = dense_pre(current, layer.w, layer.b);
        Matrix a(z.rows(), z.cols());
        for (int t = 0; t < z.rows(); ++t) {
          for (int j = 0; j < z.cols(); ++j) a(t, j) = clipped_relu(z(t, j));
        }
        c.dense_pre.push_back(std::move(z));
        current = a;
        c.dense_act.push_back(current);
        break;
      }
      case LayerKind::kBiLstm: {
        const int h = layer.fwd_u.cols();
#pragma omp parallel sections if (par::enabled())
        {
#pragma omp section
          lstm_dir_forward(layer.fwd_w, layer.fwd_u, layer.fwd_b, current, false, c.fwd);
#pragma omp section
          lstm_dir_forward(layer.bwd_w, layer.bwd_u, layer.bwd_b, current, true, c.bwd);
        }
        c.h_concat = Matrix(t_total, 2 * h);
        for (int t = 0; t < t_total; ++t) {
          for (int j = 0; j < h; ++j) {
            c.h_concat(t, j) = c.fwd.hidden(t, j);
            c.h_concat(t, h + j) = c.bwd.hidden(t, j);
          }
        }
        current = c.h_concat;
        break;
      }
      case LayerKind::kAttention: {
        const AttentionConfig& acfg = m.attention;
        const int wspan = 2 * acfg.width + 1;
        const double scale = 1.0 / std::sqrt(static_cast<double>(acfg.dk));
        c.q = matmul_nt(current, layer.wq);
        c.k = matmul_nt(current, layer.wk);
        c.v = matmul_nt(current, layer.wv);
        c.attn_weights = Matrix(t_total, wspan);
        c.attn_out = Matrix(t_total, current.cols() + acfg.dv);
        const Matrix& h_in = current;
        const bool go_par = par::enabled() && t_total >= 16;
#pragma omp parallel for schedule(static) if (go_par)
        for (int t = 0; t < t_total; ++t) {
          const int lo = std::max(0, t - acfg.width);
          const int hi = std::min(t_total - 1, t + acfg.width);
          std::vector<double> scores(hi - lo + 1);
          for (int j = lo; j <= hi; ++j) {
            double s = dot(c.q.row(t), c.k.row(j)) * scale;
            if (acfg.variant == AttentionConfig::Variant::kMaskedSelf && j > t) s += kMaskPenalty;
            scores[j - lo] = s;
          }
          softmax_window(scores);
          for (int j = lo; j <= hi; ++j) {
            c.attn_weights(t, j - t + acfg.width) = scores[j - lo];
          }
          double* out_row = c.attn_out.data() + static_cast<size_t>(t) * c.attn_out.cols();
          for (int d = 0; d < h_in.cols(); ++d) out_row[d] = h_in(t, d);
          for (int d = 0; d < acfg.dv; ++d) {
            double acc = 0.0;
            for (int j = lo; j <= hi; ++j) acc += scores[j - lo] * c.v(j, d);
            out_row[h_in.cols() + d] = acc;
          }
        }
        current = c.attn_out;
        break;
      }
      case LayerKind::kOutput: {
        c.logits = dense_pre(current, layer.w, layer.b);
        c.probs = Matrix(t_total, m.n_classes);
        c.logprobs = Matrix(t_total, m.n_classes);
        for (int t = 0; t < t_total; ++t) {
          double best = c.logits(t, 0);
          for (int k = 1; k < m.n_classes; ++k) best = std::max(best, c.logits(t, k));
          double denom = 0.0;
          for (int k = 0; k < m.n_classes; ++k) denom += std::exp(c.logits(t, k) - best);
          const double lse = best + std::log(denom);
          for (int k = 0; k < m.n_classes; ++k) {
            c.logprobs(t, k) = c.logits(t, k) - lse;
            c.probs(t, k) = std::exp(c.logprobs(t, k));
          }
        }
        current = c.logprobs;
        break;
      }
    }
  }
  return current;
}

Gradients backward(const Model& m, const Matrix& feats, const Matrix& loss_grads) {
  ForwardCache cache;
  forward(m, feats, &cache);
  return backward_cached(m, feats, loss_grads, cache);
}

Gradients backward_cached(const Model& m, const Matrix& feats, const Matrix& loss_grads,
                          const ForwardCache& cache) {
  if (!loss_grads.same_shape(cache.logprobs)) {
    fail(Errc::shape_mismatch, "loss gradient shape does not match forward output");
  }

  const int t_total = feats.rows();
  Gradients grads = zero_gradients(m);
  auto refs = param_refs(const_cast<Model&>(m));
  auto grad_of = [&](int layer_index, const char* name) -> Matrix& {
    const std::string full = "layer" + std::to_string(layer_index) + "/" + name;
    for (size_t i = 0; i < refs.size(); ++i) {
      if (refs[i].name == full) return grads.tensors[i];
    }
    fail(Errc::shape_mismatch, "no gradient slot for " + full);
  };

  // Upstream gradient flowing backwards through the layer stack.
  Matrix upstream;

  int dense_seen = 0;
  for (const auto& layer : m.layers) {
    if (layer.spec.kind == LayerKind::kDense) ++dense_seen;
  }

  for (int li = static_cast<int>(m.layers.size()) - 1; li >= 0; --li) {
    const Layer& layer = m.layers[li];
    switch (layer.spec.kind) {
      case LayerKind::kOutput: {
        // Chain through the row-wise log-softmax first.
        Matrix dlogits(t_total, m.n_classes);
        for (int t = 0; t < t_total; ++t) {
          double rowsum = 0.0;
          for (int k = 0; k < m.n_classes; ++k) rowsum += loss_grads(t, k);
          for (int k = 0; k < m.n_classes; ++k) {
            dlogits(t, k) = loss_grads(t, k) - cache.probs(t, k) * rowsum;
          }
        }
        const Matrix& input = m.has_attention() ? cache.attn_out : cache.h_concat;
        grad_of(li, "W") = matmul_tn(dlogits, input);
        Matrix& db = grad_of(li, "b");
        for (int t = 0; t < t_total; ++t) {
          for (int k = 0; k < m.n_classes; ++k) db(k, 0) += dlogits(t, k);
        }
        upstream = matmul(dlogits, layer.w);
        break;
      }
      case LayerKind::kAttention: {
        const AttentionConfig& acfg = m.attention;
        const int h2 = layer.spec.input_dim;
        const double scale = 1.0 / std::sqrt(static_cast<double>(acfg.dk));
        Matrix dq(t_total, acfg.dk), dk_(t_total, acfg.dk), dv_(t_total, acfg.dv);
        Matrix dh(t_total, h2);
        for (int t = 0; t < t_total; ++t) {
          for (int d = 0; d < h2; ++d) dh(t, d) = upstream(t, d);
        }
        for (int t = 0; t < t_total; ++t) {
          const int lo = std::max(0, t - acfg.width);
          const int hi = std::min(t_total - 1, t + acfg.width);
          const double* dctx = upstream.data() + static_cast<size_t>(t) * upstream.cols() + h2;
          double weighted_sum = 0.0;
          std::vector<double> dalpha(hi - lo + 1, 0.0);
          for (int j = lo; j <= hi; ++j) {
            const double weight = cache.attn_weights(t, j - t + acfg.width);
            for (int d = 0; d < acfg.dv; ++d) dv_(j, d) += weight * dctx[d];
            double da = 0.0;
            for (int d = 0; d < acfg.dv; ++d) da += dctx[d] * cache.v(j, d);
            dalpha[j - lo] = da;
            weighted_sum += weight * da;
          }
          for (int j = lo; j <= hi; ++j) {
            const double weight = cache.attn_weights(t, j - t + acfg.width);
            if (weight == 0.0) continue;
            const double dscore = weight * (dalpha[j - lo] - weighted_sum) * scale;
            for (int d = 0; d < acfg.dk; ++d) {
              dq(t, d) += dscore * cache.k(j, d);
              dk_(j, d) += dscore * cache.q(t, d);
            }
          }
        }
        grad_of(li, "Wq") = matmul_tn(dq, cache.h_concat);
        grad_of(li, "Wk") = matmul_tn(dk_, cache.h_concat);
        grad_of(li, "Wv") = matmul_tn(dv_, cache.h_concat);
        add_scaled(matmul(dq, layer.wq), 1.0, dh);
        add_scaled(matmul(dk_, layer.wk), 1.0, dh);
        add_scaled(matmul(dv_, layer.wv), 1.0, dh);
        upstream = std::move(dh);
        break;
      }
      case LayerKind::kBiLstm: {
        const int h = layer.fwd_u.cols();
        const Matrix& input = cache.dense_act.back();
        Matrix dh_fwd(t_total, h), dh_bwd(t_total, h);
        for (int t = 0; t < t_total; ++t) {
          for (int j = 0; j < h; ++j) {
            dh_fwd(t, j) = upstream(t, j);
            dh_bwd(t, j) = upstream(t, h + j);
          }
        }
        Matrix dx(t_total, layer.spec.input_dim);
        Matrix dx_bwd(t_total, layer.spec.input_dim);
        lstm_dir_backward(layer.fwd_w, layer.fwd_u, input, cache.fwd, false, dh_fwd,
                          grad_of(li, "fwd_W"), grad_of(li, "fwd_U"), grad_of(li, "fwd_b"), dx);
        lstm_dir_backward(layer.bwd_w, layer.bwd_u, input, cache.bwd, true, dh_bwd,
                          grad_of(li, "bwd_W"), grad_of(li, "bwd_U"), grad_of(li, "bwd_b"),
                          dx_bwd);
        add_scaled(dx_bwd, 1.0, dx);
        upstream = std::move(dx);
        break;
      }
      case LayerKind::kDense: {
        --dense_seen;
        const Matrix& pre = cache.dense_pre[dense_seen];
        const Matrix& input = dense_seen == 0 ? feats : cache.dense_act[dense_seen - 1];
        Matrix dz(t_total, layer.spec.output_dim);
        for (int t = 0; t < t_total; ++t) {
          for (int j = 0; j < layer.spec.output_dim; ++j) {
            dz(t, j) = upstream(t, j) * clipped_relu_grad(pre(t, j));
          }
        }
        grad_of(li, "W") = matmul_tn(dz, input);
        Matrix& db = grad_of(li, "b");
        for (int t = 0; t < t_total; ++t) {
          for (int j = 0; j < layer.spec.output_dim; ++j) db(j, 0) += dz(t, j);
        }
        upstream = matmul(dz, layer.w);
        break;
      }
    }
  }

  // Frozen layers propagate but report zero gradients.
  for (size_t i = 0; i < refs.size(); ++i) {
    if (!m.layers[refs[i].layer_index].spec.trainable) grads.tensors[i].fill(0.0);
  }
  return grads;
}

void sgd_step(Model& m, const Gradients& g, double lr) {
  auto refs = param_refs(m);
  if (refs.size() != g.tensors.size()) {
    fail(Errc::shape_mismatch, "gradient tensor count does not match the model");
  }
  for (size_t i = 0; i < refs.size(); ++i) {
    if (!refs[i].tensor->same_shape(g.tensors[i])) {
      fail(Errc::shape_mismatch, "gradient shape mismatch for " + refs[i].name);
    }
    if (!g.tensors[i].all_finite()) {
      fail(Errc::non_finite, "non-finite gradient entries in " + refs[i].name);
    }
  }
  for (size_t i = 0; i < refs.size(); ++i) {
    if (!m.layers[refs[i].layer_index].spec.trainable) continue;
    double* p = refs[i].tensor->data();
    const double* gd = g.tensors[i].data();
    for (size_t n = 0; n < refs[i].tensor->size(); ++n) p[n] -= lr * gd[n];
  }
}

}  // namespace strata::net
