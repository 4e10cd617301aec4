// strata/transfer.hpp
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

#include "strata/dsp.hpp"
#include "strata/net.hpp"

namespace strata::transfer {

struct TrainState {
  int epoch = 0;
  uint64_t run_seed = 0;
  double lr = 1e-6;
  int freeze_until_epoch = 0;
  std::vector<int> transplanted_layers;  // indexes of copied (donor) layers
};

// The persistence unit: full architecture descriptor, every parameter
// tensor, the inventory (symbols plus fingerprint) and training state.
struct Checkpoint {
  net::Model model;
  TrainState state;
  std::vector<std::string> inventory_symbols;
  bool inventory_has_boundary = true;
  uint64_t inventory_fingerprint = 0;
  dsp::DspConfig dsp;
};

// File layout: magic "STRATA01", then a self-describing key-value tensor
// container (name, dtype, shape, little-endian payload), then an FNV-1a
// footer checksum over everything after the magic.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct TransplantPlan {
  int target_n_classes = 0;
  std::optional<net::AttentionConfig> attention;  // target attention layer
  int reinit_layer_count = 3;
  uint64_t reinit_seed = 0;
  int freeze_until_epoch = 20;
  uint64_t target_inventory_fingerprint = 0;
  std::vector<std::string> target_inventory_symbols;
  bool target_inventory_has_boundary = true;
};

// Builds the target model from a donor checkpoint: everything before the
// last reinit_layer_count target layers is copied bit-exactly and marked
// non-trainable; the tail (by default BiLSTM, attention, output) is
// re-created for the target dimensions and freshly initialized from
// reinit_seed.
Checkpoint transplant(const Checkpoint& source, const TransplantPlan& plan);

// Per-layer trainability at a given epoch (1-based): transplanted layers
// stay frozen through freeze_until_epoch, everything else always trains.
std::vector<bool> freeze_state(int epoch, const TrainState& state, size_t layer_count);

// Applies freeze_state to the model's trainable flags.
void apply_freeze_state(net::Model& model, int epoch, const TrainState& state);

}  // namespace strata::transfer
