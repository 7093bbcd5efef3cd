// decode/beam.h

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

#ifndef CJT_DECODE_BEAM_H_
#define CJT_DECODE_BEAM_H_

#include <vector>

#include "model/asr_model.h"
#include "model/lm_model.h"
#include "numerics/tensor.h"

namespace cjt::decode {

struct DecodeOptions {
  int beam = 20;
  double lm_weight = 0.4;
  // Fused scores are compared raw by default; hypotheses finished at EOS sit
  // in a completed pool and compete there. The normalized variant divides by
  // emitted token count (EOS included) and exists for experimentation.
  bool length_normalize = false;
  int max_len_factor = 3;  // max emitted tokens = factor * post-conv frames
};

struct DecodedHyp {
  std::vector<int> tokens;  // content tokens, no BOS/EOS
  double asr_log_prob = 0.0;
  double lm_log_prob = 0.0;
  double fused = 0.0;  // asr + lm_weight * lm
  bool finished = false;
};

// Argmax per step until EOS or the length cap; ties go to the lowest token
// id. PAD and BOS are never emitted (neither appears in any target sequence).
std::vector<int> greedy_decode(model::AsrModel& model,
                               const numerics::Tensor<float>& feats,
                               int max_len_factor = 3);

// Beam search over the fused score asr + lm_weight*lm; lm may be null, in
// which case the ranking is ASR-only regardless of lm_weight. Candidate
// ordering is fully deterministic: fused desc, token id asc, parent index
// asc. Returns the best finished hypothesis, or the best live one if nothing
// finished within the length cap.
DecodedHyp beam_decode(model::AsrModel& model, model::LmModel* lm,
                       const numerics::Tensor<float>& feats,
                       const DecodeOptions& opt);

}  // namespace cjt::decode

#endif  // CJT_DECODE_BEAM_H_
