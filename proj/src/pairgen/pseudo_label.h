// pairgen/pseudo_label.h

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

#ifndef CJT_PAIRGEN_PSEUDO_LABEL_H_
#define CJT_PAIRGEN_PSEUDO_LABEL_H_

#include <string>

#include "decode/beam.h"
#include "model/asr_model.h"
#include "model/lm_model.h"
#include "pairgen/pair_set.h"
#include "synthtask/manifest.h"
#include "synthtask/render.h"

namespace cjt::pairgen {

// Decodes every unpaired-speech record with the (fine-tuned, usually
// checkpoint-averaged) teacher, optionally fused with the LM, and keeps the
// top hypothesis as the record's training target. Only the audio reference
// is touched; the sealed transcript never enters this path.
PairSet pseudo_label(model::AsrModel& teacher, model::LmModel* lm,
                     const synthtask::Manifest& unpaired_speech,
                     const synthtask::Profiles& profiles,
                     const synthtask::Vocab& vocab, const std::string& root,
                     const decode::DecodeOptions& opt);

}  // namespace cjt::pairgen

#endif  // CJT_PAIRGEN_PSEUDO_LABEL_H_
