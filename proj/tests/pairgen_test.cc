// tests/pairgen_test.cc

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

#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "decode/beam.h"
#include "model/asr_model.h"
#include "pairgen/confidence.h"
#include "pairgen/pair_set.h"
#include "pairgen/pseudo_label.h"
#include "pairgen/synthesize.h"
#include "synthtask/corpus.h"
#include "synthtask/manifest.h"
#include "synthtask/render.h"
#include "synthtask/vocab.h"
#include "test_support.h"
#include "train/trainer.h"
#include "util/error.h"
#include "util/io.h"
#include "util/rng.h"

using namespace cjt::pairgen;
using cjt::model::AsrModel;
using cjt::numerics::Tensor;
using cjt::synthtask::AudioRef;
using cjt::synthtask::kNumSpecials;
using cjt::synthtask::Manifest;
using cjt::synthtask::ManifestRecord;
using cjt::synthtask::Profiles;
using cjt::synthtask::Vocab;
using cjt::tests::micro_asr_config;
using cjt::tests::micro_profiles;
using cjt::tests::TempDir;
using cjt::util::Rng;

namespace {

Manifest tiny_text_manifest(int n, uint64_t seed) {
  const Vocab& vocab = Vocab::standard();
  Rng rng(seed);
  Manifest m;
  for (int i = 0; i < n; ++i) {
    ManifestRecord r;
    r.id = "upt-" + std::to_string(i);
    std::vector<int> toks;
    for (int t = 0; t < 4; ++t) {
      toks.push_back(static_cast<int>(rng.uniform_int(vocab.first_content_id(),
                                                      vocab.size() - 1)));
    }
    r.transcript = vocab.decode(toks);
    r.audio = AudioRef::none();
    r.provenance = "unpaired-text";
    r.condition = "clean";
    m.records.push_back(std::move(r));
  }
  return m;
}

}  // namespace

TEST_CASE("pair sets round-trip through their TSV form") {
  const Vocab& vocab = Vocab::standard();
  PairSet pairs;
  PairRecord a;
  a.id = "p-0";
  a.audio = AudioRef::rendered("real", "clean", 7);
  a.target = {4, 9, 12};
  a.provenance = kProvSpeechPseL;
  a.confidences = {0.125, 0.5, 0.987654};
  PairRecord b;
  b.id = "p-1";
  b.audio = AudioRef::from_file("features/unpaired/p-1.feats");
  b.target = {6, 6};
  b.provenance = kProvSynAText;
  pairs.records.push_back(a);
  pairs.records.push_back(b);

  PairSet back = PairSet::parse_text(pairs.serialize(vocab), vocab, "round-trip");
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].id == a.id);
  CHECK(back.records[0].audio == a.audio);
  CHECK(back.records[0].target == a.target);
  CHECK(back.records[0].provenance == a.provenance);
  REQUIRE(back.records[0].confidences.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back.records[0].confidences[i] ==
          doctest::Approx(a.confidences[i]).epsilon(1e-6));
  }
  CHECK(back.records[1] == b);  // no confidences: exact round-trip

  TempDir dir("pairs");
  std::string path = dir.path() + "/pairs.tsv";
  pairs.save(path, vocab);
  PairSet loaded = PairSet::load(path, vocab);
  CHECK(loaded.serialize(vocab) == pairs.serialize(vocab));
}

TEST_CASE("synthesized pairs keep order, recipes, and determinism") {
  const Vocab& vocab = Vocab::standard();
  Manifest text = tiny_text_manifest(40, 5);

  PairSet all = synthesize_pairs(text, vocab, 1.0, 77);
  REQUIRE(all.records.size() == 40);
  for (size_t i = 0; i < all.records.size(); ++i) {
    const PairRecord& r = all.records[i];
    CHECK(r.id == text.records[i].id);
    CHECK(r.provenance == kProvSynAText);
    CHECK(r.target == vocab.encode(text.records[i].transcript));
    CHECK(r.audio.kind == AudioRef::Kind::render);
    CHECK(r.audio.profile == "tts");
    CHECK(r.audio.condition == "clean");
    CHECK(r.confidences.empty());
  }
  // Distinct render seeds: otherwise every utterance would share one voice
  // draw.
  CHECK(all.records[0].audio.seed != all.records[1].audio.seed);

  PairSet frac = synthesize_pairs(text, vocab, 0.25, 77);
  CHECK(frac.records.size() == 10);
  PairSet again = synthesize_pairs(text, vocab, 0.25, 77);
  REQUIRE(again.records.size() == frac.records.size());
  for (size_t i = 0; i < frac.records.size(); ++i) {
    CHECK(again.records[i] == frac.records[i]);
  }
  // Subsampling keeps manifest order.
  for (size_t i = 1; i < frac.records.size(); ++i) {
    CHECK(frac.records[i - 1].id < frac.records[i].id);
  }
  PairSet other = synthesize_pairs(text, vocab, 0.25, 78);
  bool same_pick = other.records.size() == frac.records.size();
  if (same_pick) {
    same_pick = false;
    for (size_t i = 0; i < frac.records.size(); ++i) {
      if (other.records[i].id != frac.records[i].id) { same_pick = true; break; }
    }
    CHECK(same_pick);  // a different seed picks a different subset
  }

  CHECK_THROWS_AS(synthesize_pairs(text, vocab, 0.0, 1), cjt::ConfigError);
  CHECK_THROWS_AS(synthesize_pairs(text, vocab, 1.5, 1), cjt::ConfigError);
}

TEST_CASE("pair set statistics score against sealed references") {
  const Vocab& vocab = Vocab::standard();
  Manifest refs;
  ManifestRecord r;
  r.id = "u-0";
  r.audio = AudioRef::from_file("features/u-0.feats");
  r.provenance = "unpaired-speech";
  r.condition = "clean";
  r.sealed = vocab.decode({4, 5, 6});
  refs.records.push_back(r);

  PairSet pairs;
  PairRecord p;
  p.id = "u-0";
  p.audio = r.audio;
  p.target = {4, 9, 6, 7};  // one substitution, one insertion vs the reference
  p.provenance = kProvSpeechPseL;
  p.confidences = {0.9, 0.2, 0.8, 0.1};
  pairs.records.push_back(p);

  PairSetStats stats = pair_set_stats(pairs, refs, vocab);
  CHECK(stats.count == 1);
  CHECK(stats.scored == 1);
  CHECK(stats.wer == doctest::Approx(2.0 / 3.0));
  CHECK(stats.mean_confidence == doctest::Approx(0.5));
}

TEST_CASE("an overfit teacher pseudo-labels its own utterances back") {
  const Vocab& vocab = Vocab::standard();
  Profiles profiles = micro_profiles();
  TempDir dir("psel");

  // Ten gold pairs, trained to memorization.
  PairSet gold = cjt::tests::synthetic_pairs(10, 3, 31, kProvGold);
  cjt::model::AsrModelConfig cfg = micro_asr_config();
  cfg.dropout = 0.05;
  AsrModel teacher(cfg);
  Rng init_rng(32);
  teacher.init(init_rng);
  cjt::train::TrainConfig tc = cjt::tests::micro_train_config();
  tc.dropout = 0.05;
  cjt::train::Trainer trainer(teacher, tc, profiles, vocab, dir.path());
  trainer.train_supervised(gold, 250, "teacher");

  // The same audio repackaged as unpaired speech: materialized features,
  // transcript withheld into the sealed field.
  cjt::util::ensure_dir(dir.path() + "/features");
  Manifest unpaired;
  for (const PairRecord& g : gold.records) {
    Tensor<float> feats = cjt::synthtask::render(g.target, profiles.real, g.audio.seed,
                                                 false, vocab);
    cjt::util::FeatureDump dump;
    dump.frames = static_cast<uint32_t>(feats.rows());
    dump.dim = static_cast<uint32_t>(feats.cols());
    dump.data.assign(feats.data(), feats.data() + feats.numel());
    std::string rel = "features/" + g.id + ".feats";
    cjt::util::write_feature_dump(dir.path() + "/" + rel, dump);

    ManifestRecord r;
    r.id = g.id;
    r.audio = AudioRef::from_file(rel);
    r.provenance = "unpaired-speech";
    r.condition = "clean";
    r.sealed = vocab.decode(g.target);
    unpaired.records.push_back(std::move(r));
  }

  cjt::decode::DecodeOptions opt;
  opt.beam = 1;
  opt.lm_weight = 0.0;
  PairSet labels = pseudo_label(teacher, nullptr, unpaired, profiles, vocab, dir.path(), opt);
  REQUIRE(labels.records.size() == unpaired.records.size());

  // Width-1 pseudo-labeling is exactly greedy decoding, record by record.
  for (size_t i = 0; i < labels.records.size(); ++i) {
    const PairRecord& p = labels.records[i];
    CHECK(p.id == unpaired.records[i].id);
    CHECK(p.provenance == kProvSpeechPseL);
    CHECK(p.audio == unpaired.records[i].audio);
    CHECK(p.confidences.empty());
    Tensor<float> feats = cjt::synthtask::load_audio(p.audio, "", profiles, vocab,
                                                     dir.path());
    CHECK(p.target == cjt::decode::greedy_decode(teacher, feats, opt.max_len_factor));
  }

  // Memorized training utterances come back essentially verbatim.
  PairSetStats stats = pair_set_stats(labels, unpaired, vocab);
  CHECK(stats.count == 10);
  CHECK(stats.wer < 0.05);

  // Confidence scoring fills [0,1] values for every target token, agrees with
  // the single-record probe, and is idempotent.
  score_confidences(teacher, labels, profiles, vocab, dir.path());
  double conf_sum = 0.0;
  long long conf_n = 0;
  for (const PairRecord& p : labels.records) {
    REQUIRE(p.confidences.size() == p.target.size());
    for (double c : p.confidences) {
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      conf_sum += c;
      ++conf_n;
    }
    Tensor<float> feats = cjt::synthtask::load_audio(p.audio, "", profiles, vocab,
                                                     dir.path());
    std::vector<double> direct = token_confidences(teacher, feats, p.target);
    REQUIRE(direct.size() == p.confidences.size());
    for (size_t i = 0; i < direct.size(); ++i) {
      CHECK(p.confidences[i] == doctest::Approx(direct[i]).epsilon(1e-9));
    }
  }
  CHECK(conf_sum / static_cast<double>(conf_n) > 0.8);  // memorized => confident

  PairSet rescored = labels;
  score_confidences(teacher, rescored, profiles, vocab, dir.path());
  for (size_t i = 0; i < labels.records.size(); ++i) {
    CHECK(rescored.records[i].confidences == labels.records[i].confidences);
  }
}
