// synthtask/spec_augment.h

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

#ifndef CJT_SYNTHTASK_SPEC_AUGMENT_H_
#define CJT_SYNTHTASK_SPEC_AUGMENT_H_

#include "numerics/tensor.h"
#include "util/rng.h"

namespace cjt::synthtask {

// Frequency/time masking policy. Mask widths are drawn per application:
// frequency masks up to ceil(mel/8) channels, time masks up to
// ceil(frames/10) frames. Masked cells are set to the mean of the original
// (unmasked) utterance.
struct SpecAugmentPolicy {
  int freq_masks = 2;
  int time_masks = 2;
};

// Returns an augmented copy; the input is untouched. A policy with zero
// masks returns an identical copy without consuming randomness.
cjt::numerics::Tensor<float> spec_augment(const cjt::numerics::Tensor<float>& features,
                                          const SpecAugmentPolicy& policy,
                                          cjt::util::Rng& rng);

}  // namespace cjt::synthtask

#endif  // CJT_SYNTHTASK_SPEC_AUGMENT_H_
