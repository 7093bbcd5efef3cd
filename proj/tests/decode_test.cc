// tests/decode_test.cc

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

#include "decode/beam.h"
#include "decode/report.h"
#include "decode/wer.h"
#include "model/asr_model.h"
#include "model/lm_model.h"
#include "numerics/tensor.h"
#include "oracles.h"
#include "synthtask/render.h"
#include "synthtask/vocab.h"
#include "test_support.h"
#include "util/error.h"
#include "util/rng.h"

using namespace cjt::decode;
using cjt::model::AsrModel;
using cjt::model::AsrModelConfig;
using cjt::model::LmModel;
using cjt::numerics::Tensor;
using cjt::synthtask::kEos;
using cjt::synthtask::kNumSpecials;
using cjt::synthtask::kUnk;
using cjt::synthtask::Vocab;
using cjt::tests::edit_distance_recursive;
using cjt::tests::micro_asr_config;
using cjt::tests::micro_lm_config;
using cjt::tests::micro_profiles;
using cjt::util::Rng;

namespace {

// Fresh stacks leave their output projection at zero (uniform logits), so the
// searches would always pick EOS first. Randomizing the projection in place
// turns the model into an arbitrary but deterministic scorer.
void randomize_output(cjt::model::ParamStore& store, const std::string& prefix,
                      uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  for (const char* leaf : {"out.w", "out.b"}) {
    Tensor<float>& t = store.value(prefix + leaf);
    for (size_t i = 0; i < t.numel(); ++i) {
      t.data()[i] = static_cast<float>(scale * (rng.uniform() * 2.0 - 1.0));
    }
  }
}

AsrModel random_scorer(uint64_t seed) {
  AsrModel model(micro_asr_config());
  Rng rng(seed);
  model.init(rng);
  randomize_output(model.params(), "dec.", seed + 1);
  return model;
}

Tensor<float> random_audio(Rng& rng, int frames, int mel) {
  return cjt::tests::rand_tensor_f(rng, {frames, mel});
}

}  // namespace

TEST_CASE("wer of identical sequences is zero") {
  std::vector<int> seq = {4, 9, 7, 7, 12};
  WerResult r = wer(seq, seq);
  CHECK(r.rate == 0.0);
  CHECK(r.alignment.distance() == 0);
  CHECK(r.alignment.matches == 5);
  CHECK(alignment_string(r.alignment) == "=====");
  for (uint8_t f : r.alignment.hyp_correct) CHECK(f == 1);
}

TEST_CASE("wer worked example with one substitution and one insertion") {
  std::vector<int> ref = {4, 5, 6};
  std::vector<int> hyp = {4, 9, 6, 7};
  WerResult r = wer(ref, hyp);
  CHECK(r.alignment.substitutions == 1);
  CHECK(r.alignment.insertions == 1);
  CHECK(r.alignment.deletions == 0);
  CHECK(r.alignment.matches == 2);
  CHECK(r.rate == doctest::Approx(2.0 / 3.0));
  CHECK(alignment_string(r.alignment) == "=S=I");
  REQUIRE(r.alignment.hyp_correct.size() == 4);
  CHECK(r.alignment.hyp_correct[0] == 1);
  CHECK(r.alignment.hyp_correct[1] == 0);
  CHECK(r.alignment.hyp_correct[2] == 1);
  CHECK(r.alignment.hyp_correct[3] == 0);
}

TEST_CASE("an empty hypothesis is all deletions; an empty reference is an error") {
  WerResult r = wer({4, 5, 6}, {});
  CHECK(r.rate == doctest::Approx(1.0));
  CHECK(r.alignment.deletions == 3);
  CHECK(alignment_string(r.alignment) == "DDD");
  CHECK(r.alignment.hyp_correct.empty());
  CHECK_THROWS_AS(wer({}, {4}), cjt::Error);
}

TEST_CASE("wer rate can exceed one when the hypothesis runs long") {
  WerResult r = wer({4}, {5, 6, 7});
  CHECK(r.alignment.distance() == 3);
  CHECK(r.rate == doctest::Approx(3.0));
}

TEST_CASE("dynamic-programming distance matches exhaustive recursion on 1000 pairs") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    int ref_len = static_cast<int>(rng.uniform_int(1, 6));
    int hyp_len = static_cast<int>(rng.uniform_int(0, 6));
    std::vector<int> ref, hyp;
    for (int i = 0; i < ref_len; ++i) ref.push_back(static_cast<int>(rng.uniform_int(4, 6)));
    for (int i = 0; i < hyp_len; ++i) hyp.push_back(static_cast<int>(rng.uniform_int(4, 6)));
    WerResult r = wer(ref, hyp);
    int oracle = edit_distance_recursive(ref, hyp);
    CHECK(r.alignment.distance() == oracle);
    // The op counts must be internally consistent with both lengths.
    CHECK(r.alignment.matches + r.alignment.substitutions + r.alignment.deletions ==
          ref_len);
    CHECK(r.alignment.matches + r.alignment.substitutions + r.alignment.insertions ==
          hyp_len);
  }
}

TEST_CASE("edit distance is symmetric under swapping the pair") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> a, b;
    for (int i = 0; i < 4; ++i) a.push_back(static_cast<int>(rng.uniform_int(4, 7)));
    for (int i = 0; i < 5; ++i) b.push_back(static_cast<int>(rng.uniform_int(4, 7)));
    CHECK(wer(a, b).alignment.distance() == wer(b, a).alignment.distance());
  }
}

TEST_CASE("an untrained scorer ends every utterance immediately") {
  AsrModel model(micro_asr_config());
  Rng rng(1);
  model.init(rng);  // output projection stays zero: every token scores equally
  Tensor<float> feats = random_audio(rng, 8, 6);
  // Uniform logits tie everywhere; the lowest non-suppressed id is EOS.
  CHECK(greedy_decode(model, feats, 3).empty());
  DecodedHyp hyp = beam_decode(model, nullptr, feats, DecodeOptions{4, 0.0, false, 3});
  CHECK(hyp.tokens.empty());
  CHECK(hyp.finished);
}

TEST_CASE("greedy equals width-1 unfused beam on 100 random inputs") {
  AsrModel model = random_scorer(7);
  Rng rng(8);
  int nonempty = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Tensor<float> feats = random_audio(rng, 4 + static_cast<int>(rng.uniform_int(0, 8)), 6);
    std::vector<int> greedy = greedy_decode(model, feats, 3);
    DecodedHyp hyp = beam_decode(model, nullptr, feats, DecodeOptions{1, 0.0, false, 3});
    CHECK(hyp.tokens == greedy);
    if (!greedy.empty()) ++nonempty;
  }
  CHECK(nonempty > 0);  // the equality must not be vacuous
}

TEST_CASE("suppressed tokens are never emitted even when they score best") {
  AsrModel model = random_scorer(9);
  // Make UNK the runaway argmax at every step.
  model.params().value("dec.out.b").at(0, kUnk) = 50.0f;
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor<float> feats = random_audio(rng, 6, 6);
    for (int tok : greedy_decode(model, feats, 3)) CHECK(tok != kUnk);
    DecodedHyp hyp = beam_decode(model, nullptr, feats, DecodeOptions{4, 0.0, false, 3});
    for (int tok : hyp.tokens) CHECK(tok != kUnk);
  }
}

TEST_CASE("a hostile EOS score drives the search to the length cap") {
  AsrModel model = random_scorer(11);
  model.params().value("dec.out.b").at(0, kEos) = -100.0f;
  Rng rng(12);
  Tensor<float> feats = random_audio(rng, 8, 6);  // 4 post-conv frames
  std::vector<int> greedy = greedy_decode(model, feats, 3);
  CHECK(greedy.size() == 12);  // 3 * 4 post-conv frames

  DecodedHyp hyp = beam_decode(model, nullptr, feats, DecodeOptions{4, 0.0, false, 3});
  CHECK(hyp.tokens.size() == 12);
  CHECK(!hyp.finished);
}

TEST_CASE("a wide beam reproduces exhaustive enumeration on a tiny model") {
  AsrModelConfig cfg;
  cfg.mel_dim = 4;
  cfg.vocab_size = 6;  // 4 specials + 2 content tokens
  cfg.enc_conv_blocks = 1;
  cfg.conv_channels = 2;
  cfg.enc_layers = 1;
  cfg.dec_conv_blocks = 1;
  cfg.dec_layers = 1;
  cfg.attn_dim = 8;
  cfg.heads = 2;
  cfg.ffn_dim = 16;
  cfg.dropout = 0.0;
  cfg.rel_clip = 4;
  AsrModel model(cfg);
  Rng rng(13);
  model.init(rng);
  randomize_output(model.params(), "dec.", 14);

  Rng audio_rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor<float> feats = random_audio(audio_rng, 2, 4);  // one post-conv frame
    // Cap = 3 emitted positions, and the pool always holds a finished
    // hypothesis, so the search returns the best of the 7 content sequences
    // of length <= 2 terminated by EOS.
    auto stepper = model.make_stepper();
    auto cross = stepper.make_cross_cache(model.encode_eval(feats), {});

    std::vector<int> best_seq;
    double best_score = 0.0;
    bool have_best = false;
    const std::vector<std::vector<int>> candidates = {
        {}, {4}, {5}, {4, 4}, {4, 5}, {5, 4}, {5, 5}};
    for (const auto& seq : candidates) {
      auto st = stepper.initial_state();
      std::vector<float> lp = stepper.step(st, cjt::synthtask::kBos, &cross);
      double score = 0.0;
      for (int tok : seq) {
        score += lp[static_cast<size_t>(tok)];
        lp = stepper.step(st, tok, &cross);
      }
      score += lp[static_cast<size_t>(kEos)];
      if (!have_best || score > best_score) {
        have_best = true;
        best_score = score;
        best_seq = seq;
      }
    }

    DecodedHyp hyp = beam_decode(model, nullptr, feats, DecodeOptions{16, 0.0, false, 3});
    CHECK(hyp.finished);
    CHECK(hyp.tokens == best_seq);
    CHECK(hyp.fused == doctest::Approx(best_score).epsilon(1e-9));
    CHECK(hyp.fused == hyp.asr_log_prob);
  }
}

TEST_CASE("a zero-weight language model changes nothing but the bookkeeping") {
  AsrModel model = random_scorer(16);
  LmModel lm(micro_lm_config());
  Rng rng(17);
  lm.init(rng);
  randomize_output(lm.params(), "lm.", 18);

  Rng audio_rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor<float> feats = random_audio(audio_rng, 8, 6);
    DecodedHyp plain = beam_decode(model, nullptr, feats, DecodeOptions{4, 0.0, false, 3});
    DecodedHyp fused = beam_decode(model, &lm, feats, DecodeOptions{4, 0.0, false, 3});
    CHECK(fused.tokens == plain.tokens);
    CHECK(fused.fused == doctest::Approx(plain.fused).epsilon(1e-12));
    CHECK(fused.asr_log_prob == doctest::Approx(plain.asr_log_prob).epsilon(1e-12));
  }
}

TEST_CASE("fused scores decompose into asr plus weighted lm") {
  AsrModel model = random_scorer(20);
  LmModel lm(micro_lm_config());
  Rng rng(21);
  lm.init(rng);
  randomize_output(lm.params(), "lm.", 22);

  Rng audio_rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor<float> feats = random_audio(audio_rng, 8, 6);
    DecodedHyp hyp = beam_decode(model, &lm, feats, DecodeOptions{4, 0.4, false, 3});
    CHECK(hyp.fused ==
          doctest::Approx(hyp.asr_log_prob + 0.4 * hyp.lm_log_prob).epsilon(1e-9));
  }
}

TEST_CASE("decode options are validated") {
  AsrModel model = random_scorer(24);
  Rng rng(25);
  Tensor<float> feats = random_audio(rng, 4, 6);
  CHECK_THROWS_AS(beam_decode(model, nullptr, feats, DecodeOptions{0, 0.0, false, 3}),
                  cjt::Error);
  CHECK_THROWS_AS(beam_decode(model, nullptr, feats, DecodeOptions{4, -0.1, false, 3}),
                  cjt::Error);
  CHECK_THROWS_AS(greedy_decode(model, feats, 0), cjt::Error);
}

TEST_CASE("score reports aggregate corpus totals and render deterministically") {
  const Vocab& vocab = Vocab::standard();
  std::vector<UttScore> scores;
  UttScore a;
  a.id = "utt-0";
  a.ref = {4, 5, 6};
  a.hyp = {4, 9, 6, 7};
  a.result = wer(a.ref, a.hyp);
  UttScore b;
  b.id = "utt-1";
  b.ref = {8, 9};
  b.hyp = {8, 9};
  b.result = wer(b.ref, b.hyp);
  scores.push_back(a);
  scores.push_back(b);

  ScoreTotals totals = score_totals(scores);
  CHECK(totals.utterances == 2);
  CHECK(totals.ref_tokens == 5);
  CHECK(totals.substitutions == 1);
  CHECK(totals.insertions == 1);
  CHECK(totals.deletions == 0);
  CHECK(totals.wer() == doctest::Approx(2.0 / 5.0));

  std::string report = render_score_report(vocab, scores);
  CHECK(report == render_score_report(vocab, scores));
  CHECK(report.find("utt-0") != std::string::npos);
  CHECK(report.find("=S=I") != std::string::npos);

  auto hyps = std::vector<std::pair<std::string, std::string>>{
      {"utt-0", vocab.decode(a.hyp)}, {"utt-1", ""}};
  std::string table = render_hyps(hyps);
  auto parsed = parse_hyps(table, "test");
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].first == "utt-0");
  CHECK(parsed[0].second == vocab.decode(a.hyp));
  CHECK(parsed[1].second.empty());
}
