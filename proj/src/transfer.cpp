// strata/transfer.cpp
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

#include "strata/transfer.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

#include "strata/error.hpp"
#include "strata/rng.hpp"

namespace strata::transfer {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'S', 'T', 'R', 'A', 'T', 'A', '0', '1'};
constexpr uint8_t kDtypeF64 = 0;
constexpr uint8_t kDtypeBytes = 1;

struct Entry {
  std::string name;
  uint8_t dtype;
  uint32_t rows;
  uint32_t cols;
  std::string payload;  // raw little-endian bytes
};

void append_u32(std::string& out, uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
               static_cast<char>(v >> 24)};
  out.append(b, 4);
}

void append_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

uint32_t take_u32(const std::string& in, size_t& pos, const std::string& path) {
  if (pos + 4 > in.size()) fail(Errc::truncated_file, "truncated checkpoint: " + path);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

uint64_t take_u64(const std::string& in, size_t& pos, const std::string& path) {
  if (pos + 8 > in.size()) fail(Errc::truncated_file, "truncated checkpoint: " + path);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

json dsp_to_json(const dsp::DspConfig& cfg) {
  return json{{"frame_ms", cfg.frame_ms},       {"step_ms", cfg.step_ms},
              {"pre_emphasis", cfg.pre_emphasis}, {"fft_size", cfg.fft_size},
              {"n_mel_filters", cfg.n_mel_filters}, {"n_mfcc", cfg.n_mfcc},
              {"fmin_hz", cfg.fmin_hz},           {"fmax_hz", cfg.fmax_hz}};
}

dsp::DspConfig dsp_from_json(const json& j) {
  dsp::DspConfig cfg;
  cfg.frame_ms = j.at("frame_ms").get<int>();
  cfg.step_ms = j.at("step_ms").get<int>();
  cfg.pre_emphasis = j.at("pre_emphasis").get<double>();
  cfg.fft_size = j.at("fft_size").get<int>();
  cfg.n_mel_filters = j.at("n_mel_filters").get<int>();
  cfg.n_mfcc = j.at("n_mfcc").get<int>();
  cfg.fmin_hz = j.at("fmin_hz").get<double>();
  cfg.fmax_hz = j.at("fmax_hz").get<double>();
  return cfg;
}

json meta_to_json(const Checkpoint& ckpt) {
  json layers = json::array();
  for (const auto& layer : ckpt.model.layers) {
    layers.push_back(json{{"kind", net::layer_kind_name(layer.spec.kind)},
                          {"input_dim", layer.spec.input_dim},
                          {"output_dim", layer.spec.output_dim},
                          {"trainable", layer.spec.trainable}});
  }
  json meta;
  meta["format_version"] = 1;
  meta["layers"] = layers;
  meta["n_classes"] = ckpt.model.n_classes;
  meta["lstm_hidden"] = ckpt.model.lstm_hidden;
  meta["attention"] = json{{"variant", net::attention_variant_name(ckpt.model.attention.variant)},
                           {"width", ckpt.model.attention.width},
                           {"dk", ckpt.model.attention.dk},
                           {"dv", ckpt.model.attention.dv}};
  meta["inventory"] = json{{"symbols", ckpt.inventory_symbols},
                           {"has_boundary", ckpt.inventory_has_boundary},
                           {"fingerprint", ckpt.inventory_fingerprint}};
  meta["state"] = json{{"epoch", ckpt.state.epoch},
                       {"run_seed", ckpt.state.run_seed},
                       {"lr", ckpt.state.lr},
                       {"freeze_until_epoch", ckpt.state.freeze_until_epoch},
                       {"transplanted_layers", ckpt.state.transplanted_layers}};
  meta["dsp"] = dsp_to_json(ckpt.dsp);
  return meta;
}

void meta_from_json(const json& meta, Checkpoint& ckpt) {
  if (meta.at("format_version").get<int>() != 1) {
    fail(Errc::version_mismatch, "unsupported checkpoint meta version");
  }
  ckpt.model.layers.clear();
  for (const auto& jl : meta.at("layers")) {
    net::Layer layer;
    layer.spec.kind = net::layer_kind_from_name(jl.at("kind").get<std::string>());
    layer.spec.input_dim = jl.at("input_dim").get<int>();
    layer.spec.output_dim = jl.at("output_dim").get<int>();
    layer.spec.trainable = jl.at("trainable").get<bool>();
    ckpt.model.layers.push_back(std::move(layer));
  }
  ckpt.model.n_classes = meta.at("n_classes").get<int>();
  ckpt.model.lstm_hidden = meta.at("lstm_hidden").get<int>();
  const auto& ja = meta.at("attention");
  ckpt.model.attention.variant =
      net::attention_variant_from_name(ja.at("variant").get<std::string>());
  ckpt.model.attention.width = ja.at("width").get<int>();
  ckpt.model.attention.dk = ja.at("dk").get<int>();
  ckpt.model.attention.dv = ja.at("dv").get<int>();
  const auto& ji = meta.at("inventory");
  ckpt.inventory_symbols = ji.at("symbols").get<std::vector<std::string>>();
  ckpt.inventory_has_boundary = ji.at("has_boundary").get<bool>();
  ckpt.inventory_fingerprint = ji.at("fingerprint").get<uint64_t>();
  const auto& js = meta.at("state");
  ckpt.state.epoch = js.at("epoch").get<int>();
  ckpt.state.run_seed = js.at("run_seed").get<uint64_t>();
  ckpt.state.lr = js.at("lr").get<double>();
  ckpt.state.freeze_until_epoch = js.at("freeze_until_epoch").get<int>();
  ckpt.state.transplanted_layers = js.at("transplanted_layers").get<std::vector<int>>();
  ckpt.dsp = dsp_from_json(meta.at("dsp"));
}

// Shapes every parameter tensor of a descriptor-only model so the tensor
// entries can be validated against it.
void allocate_model_tensors(net::Model& m) {
  for (auto& layer : m.layers) {
    switch (layer.spec.kind) {
      case net::LayerKind::kDense:
      case net::LayerKind::kOutput:
        layer.w = Matrix(layer.spec.output_dim, layer.spec.input_dim);
        layer.b = Matrix(layer.spec.output_dim, 1);
        break;
      case net::LayerKind::kBiLstm: {
        const int h = m.lstm_hidden;
        layer.fwd_w = Matrix(4 * h, layer.spec.input_dim);
        layer.fwd_u = Matrix(4 * h, h);
        layer.fwd_b = Matrix(4 * h, 1);
        layer.bwd_w = Matrix(4 * h, layer.spec.input_dim);
        layer.bwd_u = Matrix(4 * h, h);
        layer.bwd_b = Matrix(4 * h, 1);
        break;
      }
      case net::LayerKind::kAttention:
        layer.wq = Matrix(m.attention.dk, layer.spec.input_dim);
        layer.wk = Matrix(m.attention.dk, layer.spec.input_dim);
        layer.wv = Matrix(m.attention.dv, layer.spec.input_dim);
        break;
    }
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string body;

  std::vector<Entry> entries;
  const std::string meta = meta_to_json(ckpt).dump();
  entries.push_back({"meta", kDtypeBytes, 1, static_cast<uint32_t>(meta.size()), meta});
  for (const auto& ref : net::param_refs(ckpt.model)) {
    Entry e;
    e.name = ref.name;
    e.dtype = kDtypeF64;
    e.rows = static_cast<uint32_t>(ref.tensor->rows());
    e.cols = static_cast<uint32_t>(ref.tensor->cols());
    e.payload.assign(reinterpret_cast<const char*>(ref.tensor->data()),
                     ref.tensor->size() * sizeof(double));
    entries.push_back(std::move(e));
  }

  append_u64(body, entries.size());
  for (const auto& e : entries) {
    append_u32(body, static_cast<uint32_t>(e.name.size()));
    body += e.name;
    body.push_back(static_cast<char>(e.dtype));
    append_u32(body, e.rows);
    append_u32(body, e.cols);
    body += e.payload;
  }
  const uint64_t checksum = fnv1a64(body.data(), body.size());

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  std::string footer;
  append_u64(footer, checksum);
  out.write(footer.data(), 8);
  if (!out) fail(Errc::io_error, "short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) fail(Errc::truncated_file, "checkpoint too small: " + path);
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) {
    if (std::memcmp(bytes.data(), "STRATA", 6) == 0) {
      fail(Errc::version_mismatch, "unrecognized checkpoint format version: " + path);
    }
    fail(Errc::corrupt_checkpoint, "bad checkpoint magic: " + path);
  }

  const std::string body = bytes.substr(8, bytes.size() - 16);
  size_t fpos = bytes.size() - 8;
  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[fpos + i])) << (8 * i);
  }
  if (fnv1a64(body.data(), body.size()) != stored) {
    fail(Errc::corrupt_checkpoint, "checkpoint checksum mismatch: " + path);
  }

  size_t pos = 0;
  const uint64_t n_entries = take_u64(body, pos, path);
  std::vector<Entry> entries;
  entries.reserve(n_entries);
  for (uint64_t i = 0; i < n_entries; ++i) {
    Entry e;
    const uint32_t name_len = take_u32(body, pos, path);
    if (pos + name_len > body.size()) fail(Errc::truncated_file, "truncated checkpoint: " + path);
    e.name = body.substr(pos, name_len);
    pos += name_len;
    if (pos + 1 > body.size()) fail(Errc::truncated_file, "truncated checkpoint: " + path);
    e.dtype = static_cast<uint8_t>(body[pos++]);
    e.rows = take_u32(body, pos, path);
    e.cols = take_u32(body, pos, path);
    const size_t payload =
        e.dtype == kDtypeF64 ? static_cast<size_t>(e.rows) * e.cols * sizeof(double)
                             : static_cast<size_t>(e.rows) * e.cols;
    if (pos + payload > body.size()) fail(Errc::truncated_file, "truncated checkpoint: " + path);
    e.payload = body.substr(pos, payload);
    pos += payload;
    entries.push_back(std::move(e));
  }

  Checkpoint ckpt;
  bool have_meta = false;
  for (const auto& e : entries) {
    if (e.name == "meta" && e.dtype == kDtypeBytes) {
      json meta = json::parse(e.payload, nullptr, false);
      if (meta.is_discarded()) fail(Errc::corrupt_checkpoint, "unparseable checkpoint meta: " + path);
      meta_from_json(meta, ckpt);
      have_meta = true;
      break;
    }
  }
  if (!have_meta) fail(Errc::corrupt_checkpoint, "checkpoint has no meta entry: " + path);

  allocate_model_tensors(ckpt.model);
  auto refs = net::param_refs(ckpt.model);
  for (auto& ref : refs) {
    const Entry* found = nullptr;
    for (const auto& e : entries) {
      if (e.name == ref.name && e.dtype == kDtypeF64) {
        found = &e;
        break;
      }
    }
    if (found == nullptr) {
      fail(Errc::shape_mismatch, "checkpoint missing tensor " + ref.name + ": " + path);
    }
    if (static_cast<int>(found->rows) != ref.tensor->rows() ||
        static_cast<int>(found->cols) != ref.tensor->cols()) {
      fail(Errc::shape_mismatch, "checkpoint tensor " + ref.name + " has shape " +
                                     std::to_string(found->rows) + "x" + std::to_string(found->cols) +
                                     ", descriptor wants " + std::to_string(ref.tensor->rows()) +
                                     "x" + std::to_string(ref.tensor->cols()));
    }
    std::memcpy(ref.tensor->data(), found->payload.data(), found->payload.size());
  }
  return ckpt;
}

Checkpoint transplant(const Checkpoint& source, const TransplantPlan& plan) {
  if (plan.target_n_classes < 2) fail(Errc::bad_config, "target n_classes must be at least 2");

  // Target layer stack: the donor stack, with an attention layer inserted
  // before the output when the target wants one and the donor has none.
  std::vector<net::LayerSpec> target_specs;
  for (const auto& layer : source.model.layers) target_specs.push_back(layer.spec);
  net::AttentionConfig target_attention = source.model.attention;
  const bool source_has_attention = source.model.has_attention();
  if (plan.attention && !source_has_attention) {
    target_attention = *plan.attention;
    const int h2 = 2 * source.model.lstm_hidden;
    net::LayerSpec attn{net::LayerKind::kAttention, h2, h2 + target_attention.dv, true};
    target_specs.insert(target_specs.end() - 1, attn);
  } else if (plan.attention) {
    target_attention = *plan.attention;
  }
  // Output layer dims for the target classes.
  target_specs.back().output_dim = plan.target_n_classes;
  if (plan.attention) {
    target_specs.back().input_dim = 2 * source.model.lstm_hidden + target_attention.dv;
  }

  const int n_layers = static_cast<int>(target_specs.size());
  if (plan.reinit_layer_count >= n_layers) {
    fail(Errc::bad_config, "reinit_layer_count " + std::to_string(plan.reinit_layer_count) +
                               " leaves nothing to transfer (target has " +
                               std::to_string(n_layers) + " layers)");
  }
  if (plan.reinit_layer_count < 1) fail(Errc::bad_config, "reinit_layer_count must be >= 1");
  const int n_copied = n_layers - plan.reinit_layer_count;
  if (n_copied > static_cast<int>(source.model.layers.size())) {
    fail(Errc::shape_mismatch, "donor has too few layers to copy from");
  }
  if (plan.attention && source_has_attention && *plan.attention != source.model.attention) {
    for (int i = 0; i < n_copied; ++i) {
      if (target_specs[i].kind == net::LayerKind::kAttention) {
        fail(Errc::bad_config,
             "cannot change the attention configuration of a copied attention layer");
      }
    }
  }

  Checkpoint target;
  target.model.n_classes = plan.target_n_classes;
  target.model.lstm_hidden = source.model.lstm_hidden;
  target.model.attention = target_attention;
  target.inventory_symbols = plan.target_inventory_symbols;
  target.inventory_has_boundary = plan.target_inventory_has_boundary;
  target.inventory_fingerprint = plan.target_inventory_fingerprint;
  target.dsp = source.dsp;
  target.state.epoch = 0;
  target.state.lr = source.state.lr;
  target.state.freeze_until_epoch = plan.freeze_until_epoch;

  // Copied head: bit-exact tensors, frozen.
  for (int i = 0; i < n_copied; ++i) {
    const net::Layer& donor = source.model.layers[i];
    if (!(donor.spec.kind == target_specs[i].kind &&
          donor.spec.input_dim == target_specs[i].input_dim &&
          donor.spec.output_dim == target_specs[i].output_dim)) {
      fail(Errc::shape_mismatch, "donor layer " + std::to_string(i) +
                                     " is incompatible with the target architecture");
    }
    net::Layer copied = donor;
    copied.spec.trainable = false;
    target.model.layers.push_back(std::move(copied));
    target.state.transplanted_layers.push_back(i);
  }

  // Reinitialized tail: fresh Glorot weights from the reinit seed. A scratch
  // model with the same tail dimensions provides the initialization.
  net::ModelDims scratch_dims;
  scratch_dims.n_inputs = source.model.input_dim();
  scratch_dims.dense_width = source.model.layers.front().spec.output_dim;
  scratch_dims.lstm_hidden = source.model.lstm_hidden;
  scratch_dims.n_classes = plan.target_n_classes;
  if (plan.attention || source_has_attention) scratch_dims.attention = target_attention;
  net::Model scratch = net::init_model(scratch_dims, plan.reinit_seed);
  if (scratch.layers.size() != target_specs.size()) {
    fail(Errc::shape_mismatch, "target architecture does not match the fixed layer stack");
  }
  for (int i = n_copied; i < n_layers; ++i) {
    net::Layer layer = std::move(scratch.layers[i]);
    layer.spec = target_specs[i];
    layer.spec.trainable = true;
    target.model.layers.push_back(std::move(layer));
  }
  return target;
}

std::vector<bool> freeze_state(int epoch, const TrainState& state, size_t layer_count) {
  if (epoch < 1) fail(Errc::bad_config, "epochs are 1-based");
  std::vector<bool> trainable(layer_count, true);
  if (epoch <= state.freeze_until_epoch) {
    for (int idx : state.transplanted_layers) {
      if (idx >= 0 && static_cast<size_t>(idx) < layer_count) trainable[idx] = false;
    }
  }
  return trainable;
}

void apply_freeze_state(net::Model& model, int epoch, const TrainState& state) {
  const auto trainable = freeze_state(epoch, state, model.layers.size());
  for (size_t i = 0; i < model.layers.size(); ++i) {
    model.layers[i].spec.trainable = trainable[i];
  }
}

}  // namespace strata::transfer
