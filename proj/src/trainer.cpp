// strata/trainer.cpp
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

#include "strata/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "strata/ctc.hpp"
#include "strata/error.hpp"
#include "strata/parallel.hpp"
#include "strata/rng.hpp"

namespace strata::trainer {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> shuffled_order(size_t n, uint64_t seed) {
  std::vector<int> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  for (size_t i = n; i > 1; --i) {
    const int j = rng.uniform_int(0, static_cast<int>(i) - 1);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

void RunConfig::validate() const {
  if (epochs < 1) fail(Errc::bad_config, "epochs must be >= 1");
  if (runs < 1) fail(Errc::bad_config, "runs must be >= 1");
  if (!(lr > 0.0)) fail(Errc::bad_config, "lr must be positive");
  if (dev_fraction < 0.0 || dev_fraction >= 1.0) {
    fail(Errc::bad_config, "dev_fraction must lie in [0, 1)");
  }
  if (attention != "bi" && attention != "masked_self" && attention != "none") {
    fail(Errc::bad_config, "attention must be bi, masked_self, or none");
  }
}

net::ModelDims RunConfig::model_dims(int n_classes, int n_inputs) const {
  net::ModelDims dims;
  dims.n_inputs = n_inputs;
  dims.dense_width = dense_width;
  dims.lstm_hidden = lstm_hidden;
  dims.n_classes = n_classes;
  if (attention != "none") {
    net::AttentionConfig acfg;
    acfg.variant = net::attention_variant_from_name(attention);
    acfg.width = attn_width;
    acfg.dk = attn_dk;
    acfg.dv = attn_dv;
    dims.attention = acfg;
  }
  return dims;
}

std::vector<PreparedUtterance> prepare(const corpus::Manifest& manifest,
                                       const corpus::PhonemeInventory& inv,
                                       const dsp::DspConfig& dsp_cfg) {
  if (manifest.entries.empty()) fail(Errc::bad_manifest, "manifest is empty");
  std::vector<PreparedUtterance> out(manifest.entries.size());
  std::vector<std::string> errors(manifest.entries.size());
  const int n = static_cast<int>(manifest.entries.size());
  const bool go_par = par::enabled() && n > 1;
#pragma omp parallel for schedule(dynamic) if (go_par)
  for (int i = 0; i < n; ++i) {
    const auto& entry = manifest.entries[i];
    try {
      PreparedUtterance u;
      u.id = entry.id;
      u.tokens = corpus::parse_tokens(corpus::transcript_text(entry), inv);
      const auto audio = corpus::load_wav(entry.audio_path);
      u.feats = dsp::mfcc(audio, dsp_cfg).matrix;
      out[i] = std::move(u);
    } catch (const Error& err) {
      errors[i] = std::string(err.what());
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      fail(Errc::bad_manifest, "utterance " + manifest.entries[i].id + ": " + errors[i]);
    }
  }
  return out;
}

double mean_loss(const net::Model& model, const std::vector<PreparedUtterance>& set) {
  if (set.empty()) return 0.0;
  double total = 0.0;
  for (const auto& u : set) {
    const Matrix logprobs = net::forward(model, u.feats);
    total += ctc::ctc_loss(logprobs, ctc::target_from_tokens(u.tokens)).loss;
  }
  return total / static_cast<double>(set.size());
}

eval::EvalReport evaluate_prepared(const net::Model& model,
                                   const std::vector<PreparedUtterance>& set, int boundary_id) {
  std::vector<eval::UtteranceEval> utts(set.size());
  const int n = static_cast<int>(set.size());
  const bool go_par = par::enabled() && n > 1;
#pragma omp parallel for schedule(dynamic) if (go_par)
  for (int i = 0; i < n; ++i) {
    const auto hyp = ctc::greedy_decode(net::forward(model, set[i].feats));
    utts[i] = eval::evaluate_tokens(set[i].id, set[i].tokens, hyp, boundary_id);
  }
  return eval::pool(std::move(utts));
}

RunResult run_training(net::Model model, transfer::TrainState state,
                       const std::vector<PreparedUtterance>& train_set,
                       const std::vector<PreparedUtterance>& dev_set, int epochs, double lr,
                       uint64_t run_seed, bool quiet) {
  RunResult result;
  result.state = state;
  result.state.run_seed = run_seed;
  result.best_dev_loss = std::numeric_limits<double>::infinity();

  if (train_set.empty()) {
    result.error = "no training utterances";
    result.model = std::move(model);
    result.best_model = result.model;
    return result;
  }

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    transfer::apply_freeze_state(model, epoch, result.state);
    const auto order = shuffled_order(train_set.size(), mix_seed(run_seed, epoch));
    double loss_sum = 0.0;
    try {
      for (int idx : order) {
        const auto& utt = train_set[idx];
        net::ForwardCache cache;
        const Matrix logprobs = net::forward(model, utt.feats, &cache);
        const auto ctc_result = ctc::ctc_loss(logprobs, ctc::target_from_tokens(utt.tokens));
        loss_sum += ctc_result.loss;
        const auto grads = net::backward_cached(model, utt.feats, ctc_result.grad, cache);
        net::sgd_step(model, grads, lr);
      }
    } catch (const Error& err) {
      result.error = "epoch " + std::to_string(epoch) + ": " + err.what();
      break;
    }
    const double epoch_loss = loss_sum / static_cast<double>(train_set.size());
    result.epoch_loss.push_back(epoch_loss);
    result.state.epoch = epoch;

    const double held_out = dev_set.empty() ? epoch_loss : mean_loss(model, dev_set);
    if (held_out < result.best_dev_loss) {
      result.best_dev_loss = held_out;
      result.best_epoch = epoch;
      result.best_model = model;
    }
    if (!quiet) {
      std::cerr << "  epoch " << epoch << "  train " << epoch_loss;
      if (!dev_set.empty()) std::cerr << "  dev " << held_out;
      std::cerr << "\n";
    }
  }

  result.model = std::move(model);
  if (result.best_epoch == 0) result.best_model = result.model;
  return result;
}

void RunLog::rebuild_envelope() {
  size_t max_len = 0;
  for (const auto& series : loss) max_len = std::max(max_len, series.size());
  mean.assign(max_len, 0.0);
  lo.assign(max_len, 0.0);
  hi.assign(max_len, 0.0);
  for (size_t e = 0; e < max_len; ++e) {
    double sum = 0.0, low = std::numeric_limits<double>::infinity(), high = -low;
    long count = 0;
    for (const auto& series : loss) {
      if (e >= series.size()) continue;
      sum += series[e];
      low = std::min(low, series[e]);
      high = std::max(high, series[e]);
      ++count;
    }
    mean[e] = count > 0 ? sum / static_cast<double>(count) : 0.0;
    lo[e] = count > 0 ? low : 0.0;
    hi[e] = count > 0 ? high : 0.0;
  }
}

std::string RunLog::serialize() const {
  std::string out;
  out += "# run\tepoch\tloss\n";
  for (size_t r = 0; r < loss.size(); ++r) {
    for (size_t e = 0; e < loss[r].size(); ++e) {
      out += std::to_string(r + 1) + "\t" + std::to_string(e + 1) + "\t" + fmt17(loss[r][e]) + "\n";
    }
    if (!run_errors.empty() && !run_errors[r].empty()) {
      out += std::to_string(r + 1) + "\tERROR\t" + run_errors[r] + "\n";
    }
  }
  out += "# epoch\tmean\tmin\tmax\n";
  for (size_t e = 0; e < mean.size(); ++e) {
    out += std::to_string(e + 1) + "\t" + fmt17(mean[e]) + "\t" + fmt17(lo[e]) + "\t" +
           fmt17(hi[e]) + "\n";
  }
  out += "# run\tper\twba\ttrigram\n";
  for (size_t r = 0; r < finals.size(); ++r) {
    out += std::to_string(r + 1) + "\t" + fmt17(finals[r].per) + "\t" +
           (finals[r].has_wba ? fmt17(finals[r].wba) : "-") + "\t" +
           (finals[r].has_trigram ? fmt17(finals[r].trigram) : "-") + "\n";
  }
  return out;
}

RunLog train(const RunConfig& cfg, const corpus::Manifest& manifest,
             const corpus::PhonemeInventory& inv) {
  namespace fs = std::filesystem;
  cfg.validate();

  const auto prepared_all = prepare(manifest, inv, cfg.dsp);

  // Explicit dev rows win; otherwise a deterministic hash split.
  std::vector<PreparedUtterance> train_set, dev_set;
  bool manifest_has_dev = false;
  for (const auto& entry : manifest.entries) {
    if (entry.split == "dev") manifest_has_dev = true;
  }
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& entry = manifest.entries[i];
    if (entry.split == "test") continue;
    if (entry.split == "dev") {
      dev_set.push_back(prepared_all[i]);
    } else if (!manifest_has_dev && cfg.dev_fraction > 0.0 &&
               static_cast<double>(fnv1a64(entry.id) % 1000) < cfg.dev_fraction * 1000.0) {
      dev_set.push_back(prepared_all[i]);
    } else {
      train_set.push_back(prepared_all[i]);
    }
  }
  if (train_set.empty()) fail(Errc::bad_manifest, "no training utterances after the split");

  std::optional<transfer::Checkpoint> init;
  if (!cfg.init_checkpoint.empty()) {
    init = transfer::load_checkpoint(cfg.init_checkpoint);
    if (init->inventory_fingerprint != 0 && init->inventory_fingerprint != inv.fingerprint()) {
      fail(Errc::bad_config, "init checkpoint was built for a different inventory");
    }
    if (init->model.n_classes != inv.n_classes()) {
      fail(Errc::shape_mismatch, "init checkpoint has " + std::to_string(init->model.n_classes) +
                                     " classes, inventory wants " +
                                     std::to_string(inv.n_classes()));
    }
  }

  const int n_inputs = train_set.front().feats.cols();
  const int boundary = inv.has_boundary() ? inv.boundary_id() : 0;

  RunLog log;
  log.loss.resize(cfg.runs);
  log.finals.resize(cfg.runs);
  log.run_errors.assign(cfg.runs, "");

  for (int r = 0; r < cfg.runs; ++r) {
    const uint64_t run_seed = mix_seed(cfg.seed, static_cast<uint64_t>(r + 1));
    net::Model model;
    transfer::TrainState state;
    if (init) {
      model = init->model;
      state = init->state;
    } else {
      model = net::init_model(cfg.model_dims(inv.n_classes(), n_inputs), run_seed);
      state.freeze_until_epoch = 0;
    }
    state.lr = cfg.lr;

    if (!cfg.quiet) std::cerr << "run " << (r + 1) << "/" << cfg.runs << "\n";
    RunResult result =
        run_training(std::move(model), state, train_set, dev_set, cfg.epochs, cfg.lr, run_seed,
                     cfg.quiet);
    log.loss[r] = result.epoch_loss;
    log.run_errors[r] = result.error;
    if (!result.error.empty() && !cfg.quiet) {
      std::cerr << "run " << (r + 1) << " aborted: " << result.error << "\n";
    }

    const auto& eval_set = dev_set.empty() ? train_set : dev_set;
    const auto report = evaluate_prepared(result.model, eval_set, boundary);
    log.finals[r].per = report.per;
    log.finals[r].wba = report.wba;
    log.finals[r].trigram = report.trigram;
    log.finals[r].has_wba = report.has_wba;
    log.finals[r].has_trigram = report.has_trigram;

    if (!cfg.out_dir.empty()) {
      const fs::path run_dir = fs::path(cfg.out_dir) / ("run" + std::to_string(r + 1));
      std::error_code ec;
      fs::create_directories(run_dir, ec);
      if (ec) fail(Errc::io_error, "cannot create run directory: " + run_dir.string());
      transfer::Checkpoint ckpt;
      ckpt.model = result.model;
      ckpt.state = result.state;
      ckpt.inventory_symbols = inv.symbols();
      ckpt.inventory_has_boundary = inv.has_boundary();
      ckpt.inventory_fingerprint = inv.fingerprint();
      ckpt.dsp = cfg.dsp;
      transfer::save_checkpoint(ckpt, (run_dir / "final.ckpt").string());
      ckpt.model = result.best_model;
      ckpt.state.epoch = result.best_epoch;
      transfer::save_checkpoint(ckpt, (run_dir / "best.ckpt").string());
    }
  }

  log.rebuild_envelope();

  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    std::ofstream out(fs::path(cfg.out_dir) / "runlog.tsv");
    if (!out) fail(Errc::io_error, "cannot write run log");
    out << log.serialize();
  }
  return log;
}

}  // namespace strata::trainer
