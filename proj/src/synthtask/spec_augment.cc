// synthtask/spec_augment.cc

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

#include "synthtask/spec_augment.h"

#include "util/error.h"

namespace cjt::synthtask {

using cjt::numerics::Tensor;

Tensor<float> spec_augment(const Tensor<float>& features,
                           const SpecAugmentPolicy& policy, cjt::util::Rng& rng) {
  if (policy.freq_masks < 0 || policy.time_masks < 0) {
    throw Error("spec_augment: negative mask count");
  }
  Tensor<float> out = features.clone();
  if (policy.freq_masks == 0 && policy.time_masks == 0) return out;

  const int frames = features.rows();
  const int mel = features.cols();
  double mean = 0.0;
  const float* src = features.data();
  for (size_t i = 0; i < features.numel(); ++i) mean += static_cast<double>(src[i]);
  mean /= static_cast<double>(features.numel());
  const float fill = static_cast<float>(mean);

  const int max_f = (mel + 7) / 8;
  const int max_t = (frames + 9) / 10;
  for (int m = 0; m < policy.freq_masks; ++m) {
    const int width = static_cast<int>(rng.uniform_int(0, max_f));
    if (width == 0) continue;
    const int start = static_cast<int>(rng.uniform_int(0, mel - width));
    for (int t = 0; t < frames; ++t) {
      float* row = out.row(t);
      for (int c = start; c < start + width; ++c) row[c] = fill;
    }
  }
  for (int m = 0; m < policy.time_masks; ++m) {
    const int width = static_cast<int>(rng.uniform_int(0, max_t));
    if (width == 0) continue;
    const int start = static_cast<int>(rng.uniform_int(0, frames - width));
    for (int t = start; t < start + width; ++t) {
      float* row = out.row(t);
      for (int c = 0; c < mel; ++c) row[c] = fill;
    }
  }
  return out;
}

}  // namespace cjt::synthtask
