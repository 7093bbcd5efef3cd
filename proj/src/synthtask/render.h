// synthtask/render.h

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

#ifndef CJT_SYNTHTASK_RENDER_H_
#define CJT_SYNTHTASK_RENDER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "numerics/tensor.h"
#include "synthtask/vocab.h"
#include "util/kv_config.h"
#include "util/rng.h"

namespace cjt::synthtask {

// Acoustic-variation knobs of the toy task. The "real" renderer stands in for
// recorded speech; the "tts" renderer models a synthesizer whose output shows
// strictly less variation on three axes: speaker pool size, per-token
// duration jitter, and additive noise.
struct TaskParams {
  int mel_dim = 16;
  int speakers_real = 12;
  int speakers_tts = 3;
  double speaker_jitter = 0.22;    // affine transforms are I + U(-j,j) entrywise
  int dur_real_lo = 3, dur_real_hi = 8;
  int dur_tts_lo = 4, dur_tts_hi = 6;
  double noise_real = 0.30;
  double noise_tts = 0.08;

  void validate() const;
  static TaskParams from_kv(const cjt::util::KvConfig& cfg);  // [task] section
  void to_kv(cjt::util::KvConfig& cfg) const;
};

// One speaker: frame -> gain * frame + bias.
struct SpeakerTransform {
  cjt::numerics::Tensor<float> gain;  // [mel, mel]
  cjt::numerics::Tensor<float> bias;  // [1, mel]
};

struct RenderProfile {
  enum class Kind { real, tts };
  Kind kind = Kind::real;
  // Shared pronunciation: one prototype frame per content token, indexed by
  // (token id - first content id). Both profiles reference the same values.
  cjt::numerics::Tensor<float> prototypes;  // [content_count, mel]
  std::vector<SpeakerTransform> speakers;
  int dur_lo = 3, dur_hi = 8;
  double noise_sigma = 0.3;
};

struct Profiles {
  RenderProfile real;
  RenderProfile tts;
};

// Builds both profiles from one RNG stream: prototypes first, then the real
// speaker pool, then the disjoint tts pool.
Profiles make_profiles(const TaskParams& params, const Vocab& vocab,
                       cjt::util::Rng& rng);

// Renders a content-token transcript to features [frames, mel]. Every token
// emits duration ~ U{dur_lo..dur_hi} frames of speaker(prototype) + N(0,
// sigma^2) noise; the "other" condition adds a second post-hoc noise pass of
// sqrt(3)*sigma, doubling the total noise standard deviation. Deterministic
// in (transcript, profile, seed, other).
cjt::numerics::Tensor<float> render(const std::vector<int>& transcript,
                                    const RenderProfile& profile, uint64_t seed,
                                    bool other, const Vocab& vocab);

}  // namespace cjt::synthtask

#endif  // CJT_SYNTHTASK_RENDER_H_
