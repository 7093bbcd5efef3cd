// pairgen/confidence.h

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

#ifndef CJT_PAIRGEN_CONFIDENCE_H_
#define CJT_PAIRGEN_CONFIDENCE_H_

#include <string>
#include <vector>

#include "model/asr_model.h"
#include "pairgen/pair_set.h"
#include "synthtask/render.h"

namespace cjt::pairgen {

// Teacher-forced probability the model assigns to each target token
// (eval mode, no augmentation). Result has exactly target.size() entries.
std::vector<double> token_confidences(model::AsrModel& model,
                                      const numerics::Tensor<float>& feats,
                                      const std::vector<int>& target);

// Fills `confidences` of every speech-PseL record in place. Idempotent and
// record-order independent: each record's scores depend only on that record
// and the model.
void score_confidences(model::AsrModel& model, PairSet& pairs,
                       const synthtask::Profiles& profiles,
                       const synthtask::Vocab& vocab, const std::string& root);

}  // namespace cjt::pairgen

#endif  // CJT_PAIRGEN_CONFIDENCE_H_
