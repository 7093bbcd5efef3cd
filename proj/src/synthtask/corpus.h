// synthtask/corpus.h

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

#ifndef CJT_SYNTHTASK_CORPUS_H_
#define CJT_SYNTHTASK_CORPUS_H_

#include <cstdint>
#include <vector>

#include "synthtask/manifest.h"
#include "synthtask/render.h"
#include "synthtask/vocab.h"
#include "util/kv_config.h"
#include "util/rng.h"

namespace cjt::synthtask {

struct CorpusSizes {
  int paired_n = 200;
  int unpaired_speech_n = 5000;
  int unpaired_text_n = 20000;
  int eval_n = 100;  // records per eval set (dev/test x clean/other)
  int min_len = 3;
  int max_len = 12;

  void validate() const;
  static CorpusSizes from_kv(const cjt::util::KvConfig& cfg);  // [corpus] section
  void to_kv(cjt::util::KvConfig& cfg) const;
};

// Fixed order-2 generative grammar over the content words: every context
// (previous word, or a start state) allows a small set of successors with
// random weights. Sentences are walks of a chosen length.
class Grammar {
 public:
  Grammar(const Vocab& vocab, cjt::util::Rng& rng, int successors = 12);
  std::vector<int> sample(int len, cjt::util::Rng& rng) const;

 private:
  int first_content_;
  // Entry: (token id, cumulative probability). Index: previous content word
  // (0-based), last row is the start state.
  std::vector<std::vector<std::pair<int, double>>> table_;
};

struct Corpus {
  Manifest gold;
  Manifest unpaired_speech;  // audio refs are render recipes until written
  Manifest unpaired_text;
  Manifest dev_clean, dev_other, test_clean, test_other;
};

// Samples all seven record sets. Sentences are globally deduplicated, which
// makes the unpaired-text transcripts disjoint from the unpaired-speech ones
// by construction. Deterministic in (sizes, seed).
Corpus generate_corpus(const CorpusSizes& sizes, const Vocab& vocab, uint64_t seed);

// Writes manifests under <root>/manifests/ and materializes unpaired-speech
// audio to feature-dump files under <root>/features/unpaired/, rewriting
// those records' audio refs to file refs so the training and pseudo-labeling
// paths read only feature bytes.
void write_corpus(const Corpus& corpus, const Profiles& profiles, const Vocab& vocab,
                  const std::string& root);

// Manifest file names used by write_corpus and the pipeline stages.
inline constexpr const char* kManifestNames[] = {
    "gold", "unpaired_speech", "unpaired_text",
    "dev-clean", "dev-other", "test-clean", "test-other"};

}  // namespace cjt::synthtask

#endif  // CJT_SYNTHTASK_CORPUS_H_
