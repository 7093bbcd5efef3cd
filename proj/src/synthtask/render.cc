// synthtask/render.cc

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

#include "synthtask/render.h"

#include <cmath>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::synthtask {

using cjt::numerics::Tensor;
using cjt::util::cat;

void TaskParams::validate() const {
  if (mel_dim < 1) throw ConfigError("task: mel_dim must be >= 1");
  if (speakers_tts < 1 || speakers_real <= speakers_tts) {
    throw ConfigError("task: tts speaker pool must be nonempty and strictly smaller");
  }
  if (dur_real_lo < 1 || dur_real_lo > dur_real_hi ||
      dur_tts_lo < 1 || dur_tts_lo > dur_tts_hi) {
    throw ConfigError("task: bad duration ranges");
  }
  if (dur_tts_hi - dur_tts_lo >= dur_real_hi - dur_real_lo) {
    throw ConfigError("task: tts duration range must be narrower than real");
  }
  if (noise_tts < 0.0 || noise_real <= noise_tts) {
    throw ConfigError("task: tts noise must be lower than real noise");
  }
  if (speaker_jitter < 0.0) throw ConfigError("task: speaker_jitter must be >= 0");
}

TaskParams TaskParams::from_kv(const cjt::util::KvConfig& cfg) {
  TaskParams p;
  p.mel_dim = static_cast<int>(cfg.get_int("task.mel_dim", p.mel_dim));
  p.speakers_real = static_cast<int>(cfg.get_int("task.speakers_real", p.speakers_real));
  p.speakers_tts = static_cast<int>(cfg.get_int("task.speakers_tts", p.speakers_tts));
  p.speaker_jitter = cfg.get_double("task.speaker_jitter", p.speaker_jitter);
  p.dur_real_lo = static_cast<int>(cfg.get_int("task.dur_real_lo", p.dur_real_lo));
  p.dur_real_hi = static_cast<int>(cfg.get_int("task.dur_real_hi", p.dur_real_hi));
  p.dur_tts_lo = static_cast<int>(cfg.get_int("task.dur_tts_lo", p.dur_tts_lo));
  p.dur_tts_hi = static_cast<int>(cfg.get_int("task.dur_tts_hi", p.dur_tts_hi));
  p.noise_real = cfg.get_double("task.noise_real", p.noise_real);
  p.noise_tts = cfg.get_double("task.noise_tts", p.noise_tts);
  p.validate();
  return p;
}

void TaskParams::to_kv(cjt::util::KvConfig& cfg) const {
  cfg.set_int("task.mel_dim", mel_dim);
  cfg.set_int("task.speakers_real", speakers_real);
  cfg.set_int("task.speakers_tts", speakers_tts);
  cfg.set_double("task.speaker_jitter", speaker_jitter);
  cfg.set_int("task.dur_real_lo", dur_real_lo);
  cfg.set_int("task.dur_real_hi", dur_real_hi);
  cfg.set_int("task.dur_tts_lo", dur_tts_lo);
  cfg.set_int("task.dur_tts_hi", dur_tts_hi);
  cfg.set_double("task.noise_real", noise_real);
  cfg.set_double("task.noise_tts", noise_tts);
}

namespace {

SpeakerTransform draw_speaker(int mel, double jitter, cjt::util::Rng& rng) {
  SpeakerTransform sp;
  sp.gain = Tensor<float>({mel, mel});
  sp.bias = Tensor<float>({1, mel});
  for (int i = 0; i < mel; ++i) {
    for (int j = 0; j < mel; ++j) {
      const double base = i == j ? 1.0 : 0.0;
      sp.gain.at(i, j) = static_cast<float>(base + (rng.uniform() * 2.0 - 1.0) * jitter);
    }
  }
  for (int j = 0; j < mel; ++j) {
    sp.bias.at(0, j) = static_cast<float>((rng.uniform() * 2.0 - 1.0) * jitter);
  }
  return sp;
}

}  // namespace

Profiles make_profiles(const TaskParams& params, const Vocab& vocab,
                       cjt::util::Rng& rng) {
  params.validate();
  const int mel = params.mel_dim;
  const int content = vocab.content_count();
  Tensor<float> protos({content, mel});
  for (int t = 0; t < content; ++t) {
    for (int j = 0; j < mel; ++j) {
      protos.at(t, j) = static_cast<float>(rng.uniform() * 2.0 - 1.0);
    }
  }
  Profiles out;
  out.real.kind = RenderProfile::Kind::real;
  out.real.prototypes = protos;
  out.real.dur_lo = params.dur_real_lo;
  out.real.dur_hi = params.dur_real_hi;
  out.real.noise_sigma = params.noise_real;
  for (int s = 0; s < params.speakers_real; ++s) {
    out.real.speakers.push_back(draw_speaker(mel, params.speaker_jitter, rng));
  }
  out.tts.kind = RenderProfile::Kind::tts;
  out.tts.prototypes = protos;
  out.tts.dur_lo = params.dur_tts_lo;
  out.tts.dur_hi = params.dur_tts_hi;
  out.tts.noise_sigma = params.noise_tts;
  for (int s = 0; s < params.speakers_tts; ++s) {
    out.tts.speakers.push_back(draw_speaker(mel, params.speaker_jitter, rng));
  }
  return out;
}

Tensor<float> render(const std::vector<int>& transcript,
                     const RenderProfile& profile, uint64_t seed, bool other,
                     const Vocab& vocab) {
  if (transcript.empty()) throw Error("render: empty transcript");
  const int mel = profile.prototypes.cols();
  const int first = vocab.first_content_id();
  for (int id : transcript) {
    if (id < first || id >= vocab.size()) {
      throw Error(cat("render: token ", id, " is not a content word"));
    }
  }
  cjt::util::Rng rng(seed);
  const SpeakerTransform& sp =
      profile.speakers[static_cast<size_t>(rng.uniform_int(
          0, static_cast<int64_t>(profile.speakers.size()) - 1))];

  // Draw all durations up front so the frame count is fixed before emission.
  std::vector<int> durs;
  durs.reserve(transcript.size());
  int frames = 0;
  for (size_t t = 0; t < transcript.size(); ++t) {
    const int d = static_cast<int>(rng.uniform_int(profile.dur_lo, profile.dur_hi));
    durs.push_back(d);
    frames += d;
  }

  Tensor<float> feats({frames, mel});
  int f = 0;
  std::vector<double> base(static_cast<size_t>(mel));
  for (size_t t = 0; t < transcript.size(); ++t) {
    const float* proto = profile.prototypes.row(transcript[t] - first);
    // speaker-transformed prototype, shared by all frames of this token
    for (int i = 0; i < mel; ++i) {
      double acc = sp.bias.at(0, i);
      const float* grow = sp.gain.row(i);
      for (int j = 0; j < mel; ++j) acc += static_cast<double>(grow[j]) * proto[j];
      base[static_cast<size_t>(i)] = acc;
    }
    for (int d = 0; d < durs[t]; ++d, ++f) {
      float* row = feats.row(f);
      for (int i = 0; i < mel; ++i) {
        row[i] = static_cast<float>(base[static_cast<size_t>(i)] +
                                    rng.normal(0.0, profile.noise_sigma));
      }
    }
  }
  if (other) {
    // Post-hoc pass lifting total noise std from sigma to 2*sigma.
    const double extra = std::sqrt(3.0) * profile.noise_sigma;
    float* d = feats.data();
    for (size_t i = 0; i < feats.numel(); ++i) {
      d[i] = static_cast<float>(d[i] + rng.normal(0.0, extra));
    }
  }
  return feats;
}

}  // namespace cjt::synthtask
