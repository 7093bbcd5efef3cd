// pairgen/pair_set.h

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

#ifndef CJT_PAIRGEN_PAIR_SET_H_
#define CJT_PAIRGEN_PAIR_SET_H_

#include <string>
#include <vector>

#include "synthtask/manifest.h"
#include "synthtask/vocab.h"

namespace cjt::pairgen {

// Training-pair provenance values. The two complementary sets: real speech
// carrying pseudo-label targets, and real text carrying synthesized audio.
inline constexpr const char* kProvSpeechPseL = "speech-PseL";
inline constexpr const char* kProvSynAText = "SynA-text";
inline constexpr const char* kProvGold = "gold";

struct PairRecord {
  std::string id;
  synthtask::AudioRef audio;
  std::vector<int> target;          // content token IDs, no BOS/EOS
  std::string provenance;
  std::vector<double> confidences;  // per target token; empty until scored

  bool operator==(const PairRecord&) const = default;
};

// A pair set persists as a manifest-style TSV with columns
// id, audio, target, provenance, confidences ("-" for an absent field;
// confidences comma-separated, 6-decimal fixed-point).
struct PairSet {
  std::vector<PairRecord> records;

  std::string serialize(const synthtask::Vocab& vocab) const;
  static PairSet parse_text(const std::string& text, const synthtask::Vocab& vocab,
                            const std::string& origin);
  void save(const std::string& path, const synthtask::Vocab& vocab) const;
  static PairSet load(const std::string& path, const synthtask::Vocab& vocab);
};

struct PairSetStats {
  int count = 0;
  int scored = 0;           // records carrying confidences
  double wer = 0.0;         // vs sealed references, when available
  double mean_confidence = 0.0;
};

// Evaluation-side statistics. The sealed transcripts in `refs` are read here
// and only here; training code never sees this function's inputs.
PairSetStats pair_set_stats(const PairSet& pairs, const synthtask::Manifest& refs,
                            const synthtask::Vocab& vocab);

}  // namespace cjt::pairgen

#endif  // CJT_PAIRGEN_PAIR_SET_H_
