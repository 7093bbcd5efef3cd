// tests/model_test.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "model/asr_model.h"
#include "model/checkpoint.h"
#include "model/lm_model.h"
#include "model/model_config.h"
#include "numerics/graph.h"
#include "numerics/tensor.h"
#include "pairgen/confidence.h"
#include "synthtask/render.h"
#include "synthtask/vocab.h"
#include "test_support.h"
#include "train/trainer.h"
#include "util/error.h"
#include "util/rng.h"

using namespace cjt::model;
using cjt::numerics::GraphF;
using cjt::numerics::Tensor;
using cjt::synthtask::kBos;
using cjt::synthtask::kNumSpecials;
using cjt::synthtask::render;
using cjt::synthtask::Vocab;
using cjt::tests::micro_asr_config;
using cjt::tests::micro_lm_config;
using cjt::tests::micro_profiles;
using cjt::tests::TempDir;
using cjt::util::Rng;

namespace {

Tensor<float> micro_audio(const std::vector<int>& transcript, uint64_t seed) {
  return render(transcript, micro_profiles().real, seed, false, Vocab::standard());
}

AsrModel fresh_model(uint64_t seed) {
  AsrModel model(micro_asr_config());
  Rng rng(seed);
  model.init(rng);
  return model;
}

std::vector<double> row_log_softmax(const Tensor<float>& logits, int row) {
  double mx = logits.at(row, 0);
  for (int c = 1; c < logits.cols(); ++c) mx = std::max(mx, double(logits.at(row, c)));
  double sum = 0.0;
  for (int c = 0; c < logits.cols(); ++c) sum += std::exp(logits.at(row, c) - mx);
  double lse = mx + std::log(sum);
  std::vector<double> out;
  for (int c = 0; c < logits.cols(); ++c) out.push_back(logits.at(row, c) - lse);
  return out;
}

}  // namespace

TEST_CASE("post-conv frame count follows the stride") {
  AsrModel model(micro_asr_config());  // one stride-2 block
  CHECK(model.post_conv_frames(8) == 4);
  CHECK(model.post_conv_frames(9) == 5);
  CHECK(model.post_conv_frames(1) == 1);
}

TEST_CASE("config fingerprints track architecture") {
  AsrModelConfig a = micro_asr_config();
  AsrModelConfig b = micro_asr_config();
  CHECK(a.fingerprint() == b.fingerprint());
  b.mel_dim = 8;
  CHECK(a.fingerprint() != b.fingerprint());
  CHECK(micro_lm_config().fingerprint() != a.fingerprint());
}

TEST_CASE("shallow parameter names cover the gate side of the encoder") {
  AsrModel model = fresh_model(1);
  // enc_layers = 2 resolves to 1 shallow layer.
  CHECK(model.config().resolved_shallow() == 1);
  std::vector<std::string> shallow = model.shallow_param_names();
  CHECK(!shallow.empty());
  bool has_conv = false, has_proj = false, has_l0 = false;
  for (const std::string& name : shallow) {
    CHECK(model.params().has(name));
    CHECK(name.rfind("enc.", 0) == 0);          // never decoder parameters
    CHECK(name.rfind("enc.l1.", 0) != 0);       // never layers above the gate
    if (name.rfind("enc.conv", 0) == 0) has_conv = true;
    if (name.rfind("enc.proj.", 0) == 0) has_proj = true;
    if (name.rfind("enc.l0.", 0) == 0) has_l0 = true;
  }
  CHECK(has_conv);
  CHECK(has_proj);
  CHECK(has_l0);
}

TEST_CASE("decoder rows are causal: a longer history extends, never rewrites") {
  AsrModel model = fresh_model(2);
  Tensor<float> feats = micro_audio({kNumSpecials + 1, kNumSpecials + 3}, 5);

  GraphF g(GraphF::Mode::eval);
  auto enc = model.encode(g, feats, {}, true, false);
  std::vector<int> hist4 = {kBos, kNumSpecials + 1, kNumSpecials + 3, kNumSpecials + 7};
  std::vector<int> hist3(hist4.begin(), hist4.begin() + 3);
  auto l4 = model.decode_logits(g, enc, hist4);
  auto l3 = model.decode_logits(g, enc, hist3);

  const Tensor<float>& v4 = g.value(l4);
  const Tensor<float>& v3 = g.value(l3);
  REQUIRE(v4.rows() == 4);
  REQUIRE(v3.rows() == 3);
  REQUIRE(v4.cols() == model.config().vocab_size);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < v4.cols(); ++c) CHECK(v4.at(r, c) == v3.at(r, c));
  }
}

TEST_CASE("a BOS-only history yields a single logits row") {
  AsrModel model = fresh_model(3);
  Tensor<float> feats = micro_audio({kNumSpecials + 2}, 6);
  GraphF g(GraphF::Mode::eval);
  auto fwd = model.forward(g, feats, {kBos}, true);
  CHECK(g.value(fwd.logits).rows() == 1);
  CHECK(g.value(fwd.logits).cols() == model.config().vocab_size);
}

TEST_CASE("encoder output is invariant to a masked time shift") {
  AsrModel model = fresh_model(4);
  const int mel = model.config().mel_dim;
  Tensor<float> base = micro_audio({kNumSpecials + 4, kNumSpecials + 9}, 7);
  const int t = base.rows();
  const int shift = 4;  // two post-conv frames at stride 2

  Tensor<float> shifted({t + shift, mel});
  shifted.fill(0.0f);
  for (int r = 0; r < t; ++r) {
    for (int c = 0; c < mel; ++c) shifted.at(r + shift, c) = base.at(r, c);
  }
  std::vector<uint8_t> mask(static_cast<size_t>(t + shift), 1);
  for (int r = 0; r < shift; ++r) mask[static_cast<size_t>(r)] = 0;

  GraphF g(GraphF::Mode::eval);
  auto plain = model.encode(g, base, {}, true, false);
  auto moved = model.encode(g, shifted, mask, true, false);

  const Tensor<float>& pv = g.value(plain.memory);
  const Tensor<float>& mv = g.value(moved.memory);
  REQUIRE(mv.rows() == pv.rows() + shift / 2);

  // The shifted run marks exactly the pad-only post-conv frames invalid.
  REQUIRE(moved.frame_mask.size() == static_cast<size_t>(mv.rows()));
  for (int r = 0; r < mv.rows(); ++r) {
    CHECK(moved.frame_mask[static_cast<size_t>(r)] == (r >= shift / 2 ? 1 : 0));
  }
  for (size_t i = 0; i < plain.frame_mask.size(); ++i) CHECK(plain.frame_mask[i] == 1);

  for (int r = 0; r < pv.rows(); ++r) {
    for (int c = 0; c < pv.cols(); ++c) {
      CHECK(mv.at(r + shift / 2, c) == doctest::Approx(pv.at(r, c)).epsilon(1e-6));
    }
  }
}

TEST_CASE("eval-mode encodes are deterministic") {
  AsrModel model = fresh_model(5);
  Tensor<float> feats = micro_audio({kNumSpecials + 5}, 8);
  Tensor<float> a = model.encode_eval(feats);
  Tensor<float> b = model.encode_eval(feats);
  REQUIRE(a.shape() == b.shape());
  for (size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);
}

TEST_CASE("checkpoints round-trip bit-exactly through disk") {
  AsrModel model = fresh_model(6);
  Checkpoint ck = model.snapshot(123, "teacher");
  CHECK(ck.updates == 123);
  CHECK(ck.round_tag == "teacher");
  CHECK(ck.fingerprint == model.fingerprint());

  TempDir dir("ckpt");
  std::string path = dir.path() + "/model.ckpt";
  ck.save(path);
  Checkpoint back = Checkpoint::load(path);
  CHECK(back.fingerprint == ck.fingerprint);
  CHECK(back.updates == ck.updates);
  CHECK(back.round_tag == ck.round_tag);
  REQUIRE(back.params.size() == ck.params.size());
  for (const auto& [name, value] : ck.params) {
    auto it = back.params.find(name);
    REQUIRE(it != back.params.end());
    REQUIRE(it->second.shape() == value.shape());
    for (size_t i = 0; i < value.numel(); ++i) {
      CHECK(it->second.data()[i] == value.data()[i]);
    }
  }

  AsrModel clone(micro_asr_config());
  clone.load(back);
  for (const std::string& name : model.params().names()) {
    const auto& a = model.params().value(name);
    const auto& b = clone.params().value(name);
    for (size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);
  }
}

TEST_CASE("loading a checkpoint from a different architecture fails") {
  AsrModel model = fresh_model(7);
  Checkpoint ck = model.snapshot(1, "teacher");
  AsrModelConfig other_cfg = micro_asr_config();
  other_cfg.enc_layers = 3;
  AsrModel other(other_cfg);
  CHECK_THROWS_AS(other.load(ck), cjt::Error);
}

TEST_CASE("checkpoint averaging is exact") {
  AsrModel model = fresh_model(8);
  Checkpoint ck = model.snapshot(10, "teacher");

  // Mean of k identical snapshots is the snapshot.
  Checkpoint same = average_checkpoints({ck, ck, ck});
  for (const auto& [name, value] : ck.params) {
    const auto& avg = same.params.at(name);
    for (size_t i = 0; i < value.numel(); ++i) CHECK(avg.data()[i] == value.data()[i]);
  }

  // Mean of a snapshot and its negation is exactly zero.
  Checkpoint neg;
  neg.fingerprint = ck.fingerprint;
  neg.updates = ck.updates;
  neg.round_tag = ck.round_tag;
  for (const auto& [name, value] : ck.params) {
    Tensor<float> flipped = value.clone();
    for (size_t i = 0; i < flipped.numel(); ++i) flipped.data()[i] = -flipped.data()[i];
    neg.params.emplace(name, std::move(flipped));
  }
  Checkpoint zero = average_checkpoints({ck, neg});
  for (const auto& [name, value] : zero.params) {
    for (size_t i = 0; i < value.numel(); ++i) CHECK(value.data()[i] == 0.0f);
  }

  Checkpoint wrong = ck;
  wrong.fingerprint ^= 1;
  CHECK_THROWS_AS(average_checkpoints({ck, wrong}), cjt::Error);
  CHECK_THROWS_AS(average_checkpoints({}), cjt::Error);
}

TEST_CASE("language model emits normalized and initially uniform distributions") {
  LmModel lm(micro_lm_config());
  Rng rng(9);
  lm.init(rng);

  std::vector<float> lp = lm.next_log_probs({kBos, kNumSpecials + 2, kNumSpecials + 6});
  REQUIRE(lp.size() == static_cast<size_t>(lm.config().vocab_size));
  double sum = 0.0;
  for (float v : lp) sum += std::exp(double(v));
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

  // The output projection starts at zero, so an untrained stack spreads mass
  // evenly no matter what the history is.
  double uniform = -std::log(double(lm.config().vocab_size));
  for (float v : lp) CHECK(double(v) == doctest::Approx(uniform).epsilon(1e-6));
}

TEST_CASE("language model learns a deterministic bigram") {
  LmModel lm(micro_lm_config());
  Rng rng(10);
  lm.init(rng);

  const int a = kNumSpecials + 0;
  const int b = kNumSpecials + 1;
  std::vector<std::vector<int>> sequences;
  for (int i = 0; i < 32; ++i) sequences.push_back({a, b, a, b, a, b});

  cjt::train::TrainConfig tc = cjt::tests::micro_train_config();
  tc.updates_lm = 300;
  auto result = cjt::train::train_lm(lm, sequences, tc, "", "lm");
  lm.load(result.averaged);

  std::vector<float> lp = lm.next_log_probs({kBos, a});
  CHECK(std::exp(double(lp[static_cast<size_t>(b)])) > 0.9);
  CHECK(result.log.front().loss > result.log.back().loss);
}

TEST_CASE("incremental stepping matches the teacher-forced graph") {
  AsrModel model = fresh_model(11);
  std::vector<int> content = {kNumSpecials + 3, kNumSpecials + 11, kNumSpecials + 8};
  Tensor<float> feats = micro_audio(content, 12);

  std::vector<int> history = {kBos};
  history.insert(history.end(), content.begin(), content.end());

  GraphF g(GraphF::Mode::eval);
  auto fwd = model.forward(g, feats, history, true);
  const Tensor<float>& logits = g.value(fwd.logits);

  DecoderStepper stepper = model.make_stepper();
  CrossCache cross = stepper.make_cross_cache(model.encode_eval(feats), {});
  DecoderState state = stepper.initial_state();
  for (size_t t = 0; t < history.size(); ++t) {
    std::vector<float> step_lp = stepper.step(state, history[t], &cross);
    std::vector<double> graph_lp = row_log_softmax(logits, static_cast<int>(t));
    REQUIRE(step_lp.size() == graph_lp.size());
    for (size_t c = 0; c < step_lp.size(); ++c) {
      CHECK(double(step_lp[c]) == doctest::Approx(graph_lp[c]).epsilon(1e-4));
    }
  }
}

TEST_CASE("supervised training overfits a single utterance") {
  AsrModelConfig cfg = micro_asr_config();
  cfg.dropout = 0.0;
  AsrModel model(cfg);
  Rng rng(13);
  model.init(rng);

  const Vocab& vocab = Vocab::standard();
  cjt::pairgen::PairSet gold = cjt::tests::synthetic_pairs(1, 3, 77, "gold");
  cjt::synthtask::Profiles profiles = micro_profiles();

  Tensor<float> feats = render(gold.records[0].target, profiles.real,
                               gold.records[0].audio.seed, false, vocab);
  std::vector<double> before = cjt::pairgen::token_confidences(model, feats,
                                                               gold.records[0].target);

  cjt::train::TrainConfig tc = cjt::tests::micro_train_config();
  tc.dropout = 0.0;
  cjt::train::Trainer trainer(model, tc, profiles, vocab, "");
  auto result = trainer.train_supervised(gold, 80, "overfit");
  CHECK(result.log.size() == 80);
  CHECK(result.log.front().loss > result.log.back().loss);

  std::vector<double> after = cjt::pairgen::token_confidences(model, feats,
                                                              gold.records[0].target);
  REQUIRE(after.size() == before.size());
  double mean_before = 0.0, mean_after = 0.0;
  for (double p : before) mean_before += p;
  for (double p : after) mean_after += p;
  mean_before /= static_cast<double>(before.size());
  mean_after /= static_cast<double>(after.size());
  CHECK(mean_after > 0.6);
  CHECK(mean_after > mean_before + 0.3);
}
