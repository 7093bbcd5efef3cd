// pairgen/pseudo_label.cc

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

#include "pairgen/pseudo_label.h"

#include "util/error.h"
#include "util/strings.h"

namespace cjt::pairgen {

using cjt::numerics::Tensor;
using cjt::util::cat;

PairSet pseudo_label(model::AsrModel& teacher, model::LmModel* lm,
                     const synthtask::Manifest& unpaired_speech,
                     const synthtask::Profiles& profiles,
                     const synthtask::Vocab& vocab, const std::string& root,
                     const decode::DecodeOptions& opt) {
  if (unpaired_speech.records.empty()) {
    throw Error("pseudo-label: empty manifest");
  }
  PairSet out;
  out.records.reserve(unpaired_speech.records.size());
  for (const synthtask::ManifestRecord& rec : unpaired_speech.records) {
    if (rec.provenance != "unpaired-speech") {
      throw Error(cat("pseudo-label: record ", rec.id, " has provenance '",
                      rec.provenance, "'"));
    }
    // The visible transcript of unpaired speech is empty by construction;
    // audio comes from the materialized feature file.
    const Tensor<float> feats =
        synthtask::load_audio(rec.audio, rec.transcript, profiles, vocab, root);
    const decode::DecodedHyp hyp = decode::beam_decode(teacher, lm, feats, opt);

    PairRecord pr;
    pr.id = rec.id;
    pr.audio = rec.audio;
    pr.target = hyp.tokens;
    pr.provenance = kProvSpeechPseL;
    out.records.push_back(std::move(pr));
  }
  return out;
}

}  // namespace cjt::pairgen
