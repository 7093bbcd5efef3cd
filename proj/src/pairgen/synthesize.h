// pairgen/synthesize.h

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

#ifndef CJT_PAIRGEN_SYNTHESIZE_H_
#define CJT_PAIRGEN_SYNTHESIZE_H_

#include <cstdint>

#include "pairgen/pair_set.h"
#include "synthtask/manifest.h"

namespace cjt::pairgen {

// Samples `fraction` of the unpaired-text records (default 0.1) and attaches
// a deterministic tts render recipe to each, producing the synthesized-audio
// pair set. Sampling and render seeds are pure functions of (manifest order,
// fraction, seed); records keep manifest order.
PairSet synthesize_pairs(const synthtask::Manifest& unpaired_text,
                         const synthtask::Vocab& vocab, double fraction,
                         uint64_t seed);

}  // namespace cjt::pairgen

#endif  // CJT_PAIRGEN_SYNTHESIZE_H_
