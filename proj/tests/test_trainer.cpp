#include <doctest.h>

#include "strata/dsp.hpp"
#include "strata/synth.hpp"
#include "strata/trainer.hpp"
#include "test_util.hpp"

using namespace strata;

namespace {

corpus::PhonemeInventory tiny_inventory() {
  return corpus::PhonemeInventory::from_symbols({"KA", "TO", "MI", "RU", "SE"});
}

synth::SynthConfig tiny_synth(int utterances, uint64_t seed) {
  synth::SynthConfig cfg;
  cfg.utterances = utterances;
  cfg.seed = seed;
  cfg.min_words = 1;
  cfg.max_words = 2;
  cfg.min_word_len = 2;
  cfg.max_word_len = 3;
  return cfg;
}

trainer::RunConfig tiny_run_config(const std::string& out_dir = "") {
  trainer::RunConfig cfg;
  cfg.dense_width = 12;
  cfg.lstm_hidden = 10;
  cfg.attention = "bi";
  cfg.attn_width = 6;
  cfg.attn_dk = 8;
  cfg.attn_dv = 8;
  cfg.lr = 0.05;
  cfg.epochs = 4;
  cfg.runs = 2;
  cfg.seed = 11;
  cfg.dev_fraction = 0.0;
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("synthetic corpus generation is deterministic and parseable") {
  testutil::TempDir tmp("synth");
  const auto inv = tiny_inventory();
  const auto m1 = synth::generate_corpus(inv, tiny_synth(3, 5), tmp.str("c1"));
  const auto m2 = synth::generate_corpus(inv, tiny_synth(3, 5), tmp.str("c2"));
  REQUIRE(m1.entries.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(testutil::read_file_bytes(m1.entries[i].audio_path) ==
          testutil::read_file_bytes(m2.entries[i].audio_path));
    CHECK(m1.entries[i].transcript == m2.entries[i].transcript);
    const auto tokens = corpus::parse_tokens(m1.entries[i].transcript, inv);
    CHECK(tokens.size() >= 3);
  }
}

TEST_CASE("prepare extracts features and targets, and reports bad entries") {
  testutil::TempDir tmp("prep");
  const auto inv = tiny_inventory();
  auto manifest = synth::generate_corpus(inv, tiny_synth(2, 9), tmp.str("c"));
  const auto prepared = trainer::prepare(manifest, inv, dsp::DspConfig{});
  REQUIRE(prepared.size() == 2);
  for (const auto& u : prepared) {
    CHECK(u.feats.rows() > 0);
    CHECK(u.feats.cols() == 13);
    CHECK(!u.tokens.empty());
  }
  manifest.entries[0].audio_path = tmp.str("missing.wav");
  CHECK_THROWS_AS((void)trainer::prepare(manifest, inv, dsp::DspConfig{}), Error);
}

TEST_CASE("training runs produce the configured series and are deterministic") {
  testutil::TempDir tmp("train");
  const auto inv = tiny_inventory();
  const auto manifest = synth::generate_corpus(inv, tiny_synth(3, 21), tmp.str("c"));

  auto cfg = tiny_run_config(tmp.str("out_a"));
  const auto log1 = trainer::train(cfg, manifest, inv);
  REQUIRE(log1.loss.size() == 2);
  for (const auto& series : log1.loss) CHECK(series.size() == 4);
  REQUIRE(log1.finals.size() == 2);
  for (const auto& f : log1.finals) CHECK(f.has_wba);

  // Envelope bounds contain the mean series.
  REQUIRE(log1.mean.size() == 4);
  for (size_t e = 0; e < log1.mean.size(); ++e) {
    CHECK(log1.lo[e] <= log1.mean[e] + 1e-15);
    CHECK(log1.mean[e] <= log1.hi[e] + 1e-15);
  }

  cfg.out_dir = tmp.str("out_b");
  const auto log2 = trainer::train(cfg, manifest, inv);
  CHECK(log1.serialize() == log2.serialize());
  CHECK(testutil::read_file_bytes(tmp.str("out_a") + "/runlog.tsv") ==
        testutil::read_file_bytes(tmp.str("out_b") + "/runlog.tsv"));
  // Checkpoints are byte-identical across invocations too.
  CHECK(testutil::read_file_bytes(tmp.str("out_a") + "/run1/final.ckpt") ==
        testutil::read_file_bytes(tmp.str("out_b") + "/run1/final.ckpt"));
  CHECK(testutil::read_file_bytes(tmp.str("out_a") + "/run1/final.ckpt") !=
        testutil::read_file_bytes(tmp.str("out_a") + "/run2/final.ckpt"));
}

TEST_CASE("loss drops on an easy synthetic task") {
  testutil::TempDir tmp("drop");
  const auto inv = tiny_inventory();
  const auto manifest = synth::generate_corpus(inv, tiny_synth(3, 33), tmp.str("c"));
  auto cfg = tiny_run_config();
  cfg.runs = 1;
  cfg.epochs = 30;
  const auto log = trainer::train(cfg, manifest, inv);
  REQUIRE(log.loss[0].size() == 30);
  CHECK(log.loss[0].back() < 0.5 * log.loss[0].front());
}

TEST_CASE("explicit dev rows are excluded from training") {
  testutil::TempDir tmp("dev");
  const auto inv = tiny_inventory();
  auto manifest = synth::generate_corpus(inv, tiny_synth(4, 44), tmp.str("c"));
  manifest.entries[3].split = "dev";
  const auto prepared = trainer::prepare(manifest, inv, dsp::DspConfig{});
  auto cfg = tiny_run_config();
  cfg.runs = 1;
  cfg.epochs = 2;
  const auto log = trainer::train(cfg, manifest, inv);  // must not throw
  CHECK(log.loss[0].size() == 2);
  (void)prepared;
}

TEST_CASE("run_training aborts the run on infeasible utterances") {
  const auto inv = tiny_inventory();
  // One utterance whose target needs more frames than the audio provides.
  trainer::PreparedUtterance bad;
  bad.id = "bad";
  bad.feats = Matrix(2, 13);
  bad.tokens = {inv.boundary_id(), 1, 2, 3, 4, 5, 1, 2, inv.boundary_id()};
  net::ModelDims dims;
  dims.n_inputs = 13;
  dims.dense_width = 8;
  dims.lstm_hidden = 6;
  dims.n_classes = inv.n_classes();
  auto model = net::init_model(dims, 3);
  const auto result = trainer::run_training(std::move(model), transfer::TrainState{}, {bad}, {},
                                            3, 0.01, 77, true);
  CHECK(!result.error.empty());
  CHECK(result.epoch_loss.empty());
}
