// tests/synthtask_test.cc

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
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "numerics/tensor.h"
#include "synthtask/corpus.h"
#include "synthtask/manifest.h"
#include "synthtask/render.h"
#include "synthtask/spec_augment.h"
#include "synthtask/vocab.h"
#include "test_support.h"
#include "util/error.h"
#include "util/io.h"
#include "util/rng.h"

using namespace cjt::synthtask;
using cjt::numerics::Tensor;
using cjt::tests::micro_profiles;
using cjt::tests::micro_task_params;
using cjt::tests::TempDir;
using cjt::util::Rng;

namespace {

CorpusSizes tiny_sizes() {
  CorpusSizes s;
  s.paired_n = 12;
  s.unpaired_speech_n = 30;
  s.unpaired_text_n = 60;
  s.eval_n = 8;
  s.min_len = 3;
  s.max_len = 7;
  return s;
}

int word_count(const std::string& text) {
  std::istringstream is(text);
  std::string w;
  int n = 0;
  while (is >> w) ++n;
  return n;
}

}  // namespace

TEST_CASE("standard vocabulary layout") {
  const Vocab& v = Vocab::standard();
  CHECK(v.size() == 44);
  CHECK(v.content_count() == 40);
  CHECK(v.first_content_id() == kNumSpecials);
  CHECK(v.is_special(kPad));
  CHECK(v.is_special(kUnk));
  CHECK(!v.is_special(kNumSpecials));

  std::string two = v.word(kNumSpecials) + " " + v.word(kNumSpecials + 7);
  std::vector<int> ids = v.encode(two);
  REQUIRE(ids.size() == 2);
  CHECK(ids[0] == kNumSpecials);
  CHECK(ids[1] == kNumSpecials + 7);
  CHECK(v.decode(ids) == two);
  CHECK(v.id_or_unk("zzz-not-a-word") == kUnk);
  CHECK(v.encode("zzz-not-a-word")[0] == kUnk);
}

TEST_CASE("corpus generation is deterministic in sizes and seed") {
  const Vocab& v = Vocab::standard();
  Corpus a = generate_corpus(tiny_sizes(), v, 99);
  Corpus b = generate_corpus(tiny_sizes(), v, 99);
  CHECK(a.gold == b.gold);
  CHECK(a.unpaired_speech == b.unpaired_speech);
  CHECK(a.unpaired_text == b.unpaired_text);
  CHECK(a.test_other == b.test_other);

  Corpus c = generate_corpus(tiny_sizes(), v, 100);
  CHECK(!(a.gold == c.gold));
}

TEST_CASE("corpus cardinalities, lengths, and field conventions") {
  const Vocab& v = Vocab::standard();
  CorpusSizes sizes = tiny_sizes();
  Corpus corpus = generate_corpus(sizes, v, 7);

  CHECK(corpus.gold.records.size() == static_cast<size_t>(sizes.paired_n));
  CHECK(corpus.unpaired_speech.records.size() == static_cast<size_t>(sizes.unpaired_speech_n));
  CHECK(corpus.unpaired_text.records.size() == static_cast<size_t>(sizes.unpaired_text_n));
  for (const Manifest* m : {&corpus.dev_clean, &corpus.dev_other, &corpus.test_clean,
                            &corpus.test_other}) {
    CHECK(m->records.size() == static_cast<size_t>(sizes.eval_n));
  }

  for (const auto& r : corpus.gold.records) {
    CHECK(r.provenance == "gold");
    CHECK(!r.transcript.empty());
    CHECK(r.sealed.empty());
    CHECK(r.audio.kind == AudioRef::Kind::render);
    CHECK(r.audio.profile == "real");
    int n = word_count(r.transcript);
    CHECK(n >= sizes.min_len);
    CHECK(n <= sizes.max_len);
  }
  for (const auto& r : corpus.unpaired_speech.records) {
    CHECK(r.transcript.empty());     // withheld from training
    CHECK(!r.sealed.empty());        // but kept for scoring
    CHECK(r.provenance == "unpaired-speech");
  }
  for (const auto& r : corpus.unpaired_text.records) {
    CHECK(r.audio.kind == AudioRef::Kind::none);
    CHECK(!r.transcript.empty());
    CHECK(r.provenance == "unpaired-text");
  }
  for (const auto& r : corpus.test_other.records) {
    CHECK(r.condition == "other");
    CHECK(r.audio.condition == "other");
  }
  for (const auto& r : corpus.test_clean.records) CHECK(r.condition == "clean");
}

TEST_CASE("corpus sentences are globally unique across all sets") {
  const Vocab& v = Vocab::standard();
  Corpus corpus = generate_corpus(tiny_sizes(), v, 13);
  std::set<std::string> seen;
  auto add_all = [&](const Manifest& m) {
    for (const auto& r : m.records) {
      const std::string& text = r.transcript.empty() ? r.sealed : r.transcript;
      CHECK(seen.insert(text).second);
    }
  };
  add_all(corpus.gold);
  add_all(corpus.unpaired_speech);
  add_all(corpus.unpaired_text);
  add_all(corpus.dev_clean);
  add_all(corpus.dev_other);
  add_all(corpus.test_clean);
  add_all(corpus.test_other);
}

TEST_CASE("corpus size validation rejects nonsense") {
  CorpusSizes s = tiny_sizes();
  s.min_len = 0;
  CHECK_THROWS_AS(s.validate(), cjt::ConfigError);
  s = tiny_sizes();
  s.max_len = s.min_len - 1;
  CHECK_THROWS_AS(s.validate(), cjt::ConfigError);
  s = tiny_sizes();
  s.paired_n = 0;
  CHECK_THROWS_AS(s.validate(), cjt::ConfigError);
}

TEST_CASE("degenerate renderer repeats prototypes exactly") {
  const Vocab& v = Vocab::standard();
  TaskParams p = micro_task_params();
  p.speakers_real = 1;
  p.speaker_jitter = 0.0;
  p.noise_real = 0.0;
  p.dur_real_lo = 2;
  p.dur_real_hi = 2;
  Rng rng(3);
  Profiles profiles = make_profiles(p, v, rng);

  std::vector<int> transcript = {kNumSpecials, kNumSpecials + 5, kNumSpecials + 1};
  Tensor<float> feats = render(transcript, profiles.real, 42, false, v);
  REQUIRE(feats.rows() == 6);  // 3 tokens * 2 frames
  REQUIRE(feats.cols() == p.mel_dim);
  for (int t = 0; t < 3; ++t) {
    int proto_row = transcript[static_cast<size_t>(t)] - v.first_content_id();
    for (int f = 0; f < 2; ++f) {
      for (int c = 0; c < p.mel_dim; ++c) {
        CHECK(feats.at(2 * t + f, c) ==
              doctest::Approx(profiles.real.prototypes.at(proto_row, c)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("rendering is deterministic in the seed") {
  const Vocab& v = Vocab::standard();
  Profiles profiles = micro_profiles();
  std::vector<int> transcript = {kNumSpecials + 2, kNumSpecials + 9};
  Tensor<float> a = render(transcript, profiles.real, 77, false, v);
  Tensor<float> b = render(transcript, profiles.real, 77, false, v);
  REQUIRE(a.shape() == b.shape());
  for (size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);

  Tensor<float> c = render(transcript, profiles.real, 78, false, v);
  bool differs = c.shape() != a.shape();
  if (!differs) {
    for (size_t i = 0; i < a.numel(); ++i) {
      if (a.data()[i] != c.data()[i]) { differs = true; break; }
    }
  }
  CHECK(differs);
}

TEST_CASE("the other condition doubles the noise standard deviation") {
  const Vocab& v = Vocab::standard();
  TaskParams p = micro_task_params();
  p.speakers_real = 1;
  p.speaker_jitter = 0.0;
  p.noise_real = 0.5;
  p.dur_real_lo = 3;
  p.dur_real_hi = 3;
  Rng rng(4);
  Profiles profiles = make_profiles(p, v, rng);

  std::vector<int> transcript = {kNumSpecials, kNumSpecials + 3, kNumSpecials + 6,
                                 kNumSpecials + 9};
  auto noise_std = [&](bool other) {
    double sq = 0.0;
    size_t n = 0;
    for (int s = 0; s < 200; ++s) {
      Tensor<float> feats = render(transcript, profiles.real, 500 + static_cast<uint64_t>(s),
                                   other, v);
      for (int t = 0; t < 4; ++t) {
        int proto_row = transcript[static_cast<size_t>(t)] - v.first_content_id();
        for (int f = 0; f < 3; ++f) {
          for (int c = 0; c < p.mel_dim; ++c) {
            double d = feats.at(3 * t + f, c) - profiles.real.prototypes.at(proto_row, c);
            sq += d * d;
            ++n;
          }
        }
      }
    }
    return std::sqrt(sq / static_cast<double>(n));
  };

  double clean = noise_std(false);
  double other = noise_std(true);
  CHECK(clean == doctest::Approx(0.5).epsilon(0.05));
  CHECK(other / clean == doctest::Approx(2.0).epsilon(0.06));
}

TEST_CASE("synthesized speech varies less than real speech") {
  const Vocab& v = Vocab::standard();
  Profiles profiles = micro_profiles();
  CHECK(profiles.real.speakers.size() > profiles.tts.speakers.size());
  CHECK(profiles.real.noise_sigma > profiles.tts.noise_sigma);
  CHECK(profiles.real.dur_hi - profiles.real.dur_lo > profiles.tts.dur_hi - profiles.tts.dur_lo);

  std::vector<int> transcript = {kNumSpecials + 1, kNumSpecials + 4, kNumSpecials + 8};
  auto pooled_variance = [&](const RenderProfile& prof) {
    std::vector<double> cells;
    for (int s = 0; s < 80; ++s) {
      Tensor<float> t = render(transcript, prof, 9000 + static_cast<uint64_t>(s), false, v);
      for (size_t i = 0; i < t.numel(); ++i) cells.push_back(t.data()[i]);
    }
    double mean = 0.0;
    for (double c : cells) mean += c;
    mean /= static_cast<double>(cells.size());
    double var = 0.0;
    for (double c : cells) var += (c - mean) * (c - mean);
    return var / static_cast<double>(cells.size());
  };
  CHECK(pooled_variance(profiles.real) > 1.05 * pooled_variance(profiles.tts));
}

TEST_CASE("spec augment with zero masks is an identical copy and draws nothing") {
  Rng data(6);
  Tensor<float> feats = cjt::tests::rand_tensor_f(data, {20, 6});
  Rng draw(123);
  Tensor<float> out = spec_augment(feats, SpecAugmentPolicy{0, 0}, draw);
  for (size_t i = 0; i < feats.numel(); ++i) CHECK(out.data()[i] == feats.data()[i]);
  Rng fresh(123);
  CHECK(draw.next_u64() == fresh.next_u64());  // no randomness was consumed
}

TEST_CASE("spec augment masks cells to the utterance mean and leaves the input alone") {
  Rng data(7);
  Tensor<float> feats = cjt::tests::rand_tensor_f(data, {30, 8});
  Tensor<float> before = feats.clone();
  double mean = 0.0;
  for (size_t i = 0; i < feats.numel(); ++i) mean += feats.data()[i];
  mean /= static_cast<double>(feats.numel());

  Rng draw(8);
  Tensor<float> out = spec_augment(feats, SpecAugmentPolicy{2, 2}, draw);
  REQUIRE(out.shape() == feats.shape());
  for (size_t i = 0; i < feats.numel(); ++i) CHECK(feats.data()[i] == before.data()[i]);

  int changed = 0;
  for (size_t i = 0; i < out.numel(); ++i) {
    if (out.data()[i] != feats.data()[i]) {
      ++changed;
      CHECK(out.data()[i] == doctest::Approx(mean).epsilon(1e-5));
    }
  }
  CHECK(changed > 0);

  Rng draw2(8);
  Tensor<float> out2 = spec_augment(feats, SpecAugmentPolicy{2, 2}, draw2);
  for (size_t i = 0; i < out.numel(); ++i) CHECK(out.data()[i] == out2.data()[i]);
}

TEST_CASE("audio refs serialize and parse for every kind") {
  for (const AudioRef& ref : {AudioRef::none(),
                              AudioRef::rendered("tts", "clean", 0xdeadbeefULL),
                              AudioRef::from_file("features/unpaired/u-000017.feats")}) {
    CHECK(AudioRef::parse(ref.serialize()) == ref);
  }
  CHECK_THROWS_AS(AudioRef::parse("wat:this-is-not-a-ref"), cjt::Error);
}

TEST_CASE("manifests round-trip through text and files") {
  Manifest m;
  m.records.push_back({"utt-0", AudioRef::rendered("real", "clean", 11), "alpha beta",
                       "gold", "clean", ""});
  m.records.push_back({"utt-1", AudioRef::from_file("features/unpaired/utt-1.feats"), "",
                       "unpaired-speech", "clean", "gamma delta"});
  m.records.push_back({"utt-2", AudioRef::none(), "epsilon", "unpaired-text", "clean", ""});

  Manifest back = Manifest::parse_text(m.serialize(), "round-trip");
  CHECK(back == m);

  TempDir dir("manifest");
  std::string path = dir.path() + "/m.tsv";
  m.save(path);
  CHECK(Manifest::load(path) == m);

  CHECK_THROWS_AS(Manifest::parse_text("one\tfield-count-wrong\n", "bad"), cjt::Error);
}

TEST_CASE("load_audio resolves file refs byte-identically and render refs by recipe") {
  const Vocab& v = Vocab::standard();
  Profiles profiles = micro_profiles();
  TempDir dir("audio");

  Rng data(9);
  cjt::util::FeatureDump dump;
  dump.frames = 5;
  dump.dim = 6;
  for (int i = 0; i < 30; ++i) dump.data.push_back(static_cast<float>(data.uniform()));
  cjt::util::ensure_dir(dir.path() + "/features");
  cjt::util::write_feature_dump(dir.path() + "/features/u.feats", dump);

  Tensor<float> from_file = load_audio(AudioRef::from_file("features/u.feats"), "",
                                       profiles, v, dir.path());
  REQUIRE(from_file.rows() == 5);
  REQUIRE(from_file.cols() == 6);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 6; ++c) {
      CHECK(from_file.at(r, c) == dump.data[static_cast<size_t>(r * 6 + c)]);
    }
  }

  std::string text = v.word(kNumSpecials + 2) + " " + v.word(kNumSpecials + 12);
  Tensor<float> via_ref = load_audio(AudioRef::rendered("tts", "other", 21), text,
                                     profiles, v, dir.path());
  Tensor<float> direct = render(v.encode(text), profiles.tts, 21, true, v);
  REQUIRE(via_ref.shape() == direct.shape());
  for (size_t i = 0; i < direct.numel(); ++i) CHECK(via_ref.data()[i] == direct.data()[i]);

  CHECK_THROWS_AS(load_audio(AudioRef::none(), "x", profiles, v, dir.path()), cjt::Error);
}

TEST_CASE("written corpora expose unpaired speech only as feature files") {
  const Vocab& v = Vocab::standard();
  Profiles profiles = micro_profiles();
  Corpus corpus = generate_corpus(tiny_sizes(), v, 21);
  TempDir dir("corpus");
  write_corpus(corpus, profiles, v, dir.path());

  for (const char* name : kManifestNames) {
    CHECK(cjt::util::file_exists(dir.path() + "/manifests/" + name + ".tsv"));
  }

  Manifest speech = Manifest::load(dir.path() + "/manifests/unpaired_speech.tsv");
  REQUIRE(speech.records.size() == corpus.unpaired_speech.records.size());
  for (const auto& r : speech.records) {
    CHECK(r.audio.kind == AudioRef::Kind::file);
    CHECK(r.transcript.empty());
    Tensor<float> feats = load_audio(r.audio, r.transcript, profiles, v, dir.path());
    CHECK(feats.rows() > 0);
    CHECK(feats.cols() == micro_task_params().mel_dim);
  }

  // The materialized features match what the original render recipe produces,
  // so the file rewrite changed the access path, not the audio.
  const auto& orig = corpus.unpaired_speech.records[0];
  REQUIRE(orig.audio.kind == AudioRef::Kind::render);
  Tensor<float> direct = render(v.encode(orig.sealed),
                                orig.audio.profile == "real" ? profiles.real : profiles.tts,
                                orig.audio.seed, orig.audio.condition == "other", v);
  Tensor<float> from_file = load_audio(speech.records[0].audio, "", profiles, v, dir.path());
  REQUIRE(from_file.shape() == direct.shape());
  for (size_t i = 0; i < direct.numel(); ++i) {
    CHECK(from_file.data()[i] == doctest::Approx(direct.data()[i]).epsilon(1e-6));
  }
}
