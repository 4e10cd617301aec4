// strata/trainer.hpp
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

#include <string>
#include <vector>

#include "strata/corpus.hpp"
#include "strata/dsp.hpp"
#include "strata/eval.hpp"
#include "strata/net.hpp"
#include "strata/transfer.hpp"

namespace strata::trainer {

struct RunConfig {
  dsp::DspConfig dsp;
  int dense_width = 128;
  int lstm_hidden = 128;
  std::string attention = "bi";  // bi | masked_self | none
  int attn_width = 6;
  int attn_dk = 64;
  int attn_dv = 64;
  double lr = 1e-6;
  int epochs = 30;
  int runs = 5;
  uint64_t seed = 1;
  std::string init_checkpoint;  // start every run from this checkpoint
  double dev_fraction = 0.10;   // hash split when the manifest has no dev rows
  std::string out_dir;          // empty: keep everything in memory
  bool quiet = true;

  void validate() const;
  net::ModelDims model_dims(int n_classes, int n_inputs) const;
};

struct PreparedUtterance {
  std::string id;
  Matrix feats;
  std::vector<int> tokens;
};

// Feature extraction plus transcript parsing for every manifest entry.
std::vector<PreparedUtterance> prepare(const corpus::Manifest& manifest,
                                       const corpus::PhonemeInventory& inv,
                                       const dsp::DspConfig& dsp_cfg);

struct RunResult {
  std::vector<double> epoch_loss;  // mean train CTC loss per epoch, nats/utterance
  net::Model model;                // final parameters
  net::Model best_model;           // lowest held-out loss
  transfer::TrainState state;
  int best_epoch = 0;
  double best_dev_loss = 0.0;
  std::string error;  // non-empty when the run aborted
};

// One training run: per-utterance SGD in an order reshuffled every epoch
// from run_seed, with the freeze schedule applied at each epoch start.
RunResult run_training(net::Model model, transfer::TrainState state,
                       const std::vector<PreparedUtterance>& train_set,
                       const std::vector<PreparedUtterance>& dev_set, int epochs, double lr,
                       uint64_t run_seed, bool quiet);

struct RunLog {
  std::vector<std::vector<double>> loss;  // [run][epoch]
  std::vector<double> mean, lo, hi;       // per-epoch envelope over runs
  struct Final {
    double per = 0.0, wba = 0.0, trigram = 0.0;
    bool has_wba = false, has_trigram = false;
  };
  std::vector<Final> finals;            // per run
  std::vector<std::string> run_errors;  // "" when the run completed

  void rebuild_envelope();
  // Deterministic text dump; exactly the bytes written to the log files.
  std::string serialize() const;
};

RunLog train(const RunConfig& cfg, const corpus::Manifest& manifest,
             const corpus::PhonemeInventory& inv);

// Mean forward-only CTC loss over a set; used for best-checkpoint selection.
double mean_loss(const net::Model& model, const std::vector<PreparedUtterance>& set);

// Greedy-decodes a set and pools the metric counts.
eval::EvalReport evaluate_prepared(const net::Model& model,
                                   const std::vector<PreparedUtterance>& set, int boundary_id);

}  // namespace strata::trainer
