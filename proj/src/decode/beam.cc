// decode/beam.cc

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

#include "decode/beam.h"

#include <algorithm>
#include <optional>

#include "synthtask/vocab.h"
#include "util/error.h"

namespace cjt::decode {

using cjt::model::CrossCache;
using cjt::model::DecoderState;
using cjt::model::DecoderStepper;
using cjt::numerics::Tensor;
using cjt::synthtask::kBos;
using cjt::synthtask::kEos;
using cjt::synthtask::kPad;
using cjt::synthtask::kUnk;

namespace {

// PAD and BOS never appear in any target sequence, and no rendered
// transcript contains an out-of-vocabulary word, so none of the three is a
// legal emission.
inline bool suppressed(int v) { return v == kPad || v == kBos || v == kUnk; }

}  // namespace

std::vector<int> greedy_decode(model::AsrModel& model, const Tensor<float>& feats,
                               int max_len_factor) {
  if (max_len_factor < 1) throw Error("greedy: max_len_factor must be >= 1");
  const Tensor<float> memory = model.encode_eval(feats);
  DecoderStepper stepper = model.make_stepper();
  const CrossCache cross = stepper.make_cross_cache(memory, {});
  DecoderState st = stepper.initial_state();
  const int vocab = stepper.layout().vocab;
  const int max_len = max_len_factor * memory.rows();

  std::vector<int> out;
  std::vector<float> lp = stepper.step(st, kBos, &cross);
  for (int n = 0; n < max_len; ++n) {
    int best = -1;
    float best_lp = 0.0f;
    for (int v = 0; v < vocab; ++v) {
      if (suppressed(v)) continue;
      if (best < 0 || lp[static_cast<size_t>(v)] > best_lp) {
        best = v;
        best_lp = lp[static_cast<size_t>(v)];
      }
    }
    if (best == kEos) break;
    out.push_back(best);
    lp = stepper.step(st, best, &cross);
  }
  return out;
}

namespace {

struct LiveHyp {
  std::vector<int> toks;
  double asr_lp = 0.0;
  double lm_lp = 0.0;
  DecoderState asr_st;
  DecoderState lm_st;
  std::vector<float> asr_next;  // log-probs after the last fed token
  std::vector<float> lm_next;
};

double final_score(const DecodedHyp& h, bool normalize) {
  if (!normalize) return h.fused;
  const size_t emitted = h.tokens.size() + (h.finished ? 1 : 0);
  return h.fused / static_cast<double>(std::max<size_t>(1, emitted));
}

}  // namespace

DecodedHyp beam_decode(model::AsrModel& model, model::LmModel* lm,
                       const Tensor<float>& feats, const DecodeOptions& opt) {
  if (opt.beam < 1) throw Error("beam: width must be >= 1");
  if (opt.lm_weight < 0.0) throw Error("beam: lm_weight must be >= 0");
  if (opt.max_len_factor < 1) throw Error("beam: max_len_factor must be >= 1");

  const Tensor<float> memory = model.encode_eval(feats);
  DecoderStepper stepper = model.make_stepper();
  const CrossCache cross = stepper.make_cross_cache(memory, {});
  std::optional<DecoderStepper> lm_stepper;
  if (lm != nullptr) lm_stepper.emplace(lm->make_stepper());

  const int vocab = stepper.layout().vocab;
  const int max_len = opt.max_len_factor * memory.rows();

  std::vector<LiveHyp> live(1);
  live[0].asr_st = stepper.initial_state();
  live[0].asr_next = stepper.step(live[0].asr_st, kBos, &cross);
  if (lm_stepper) {
    live[0].lm_st = lm_stepper->initial_state();
    live[0].lm_next = lm_stepper->step(live[0].lm_st, kBos, nullptr);
  }

  std::optional<DecodedHyp> best_done;
  auto consider_done = [&](DecodedHyp&& h) {
    if (!best_done || final_score(h, opt.length_normalize) >
                          final_score(*best_done, opt.length_normalize)) {
      best_done = std::move(h);
    }
  };

  struct Cand {
    double fused;
    double asr;
    double lm;
    int parent;
    int token;
  };

  for (int stepn = 0; stepn < max_len && !live.empty(); ++stepn) {
    std::vector<Cand> cands;
    cands.reserve(live.size() * static_cast<size_t>(vocab));
    for (size_t p = 0; p < live.size(); ++p) {
      const LiveHyp& h = live[p];
      for (int v = 0; v < vocab; ++v) {
        if (suppressed(v)) continue;
        Cand c;
        c.asr = h.asr_lp + h.asr_next[static_cast<size_t>(v)];
        c.lm = lm_stepper ? h.lm_lp + h.lm_next[static_cast<size_t>(v)] : 0.0;
        c.fused = c.asr + opt.lm_weight * c.lm;
        c.parent = static_cast<int>(p);
        c.token = v;
        cands.push_back(c);
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.fused != b.fused) return a.fused > b.fused;
      if (a.token != b.token) return a.token < b.token;
      return a.parent < b.parent;
    });

    std::vector<LiveHyp> next;
    next.reserve(static_cast<size_t>(opt.beam));
    const size_t take = std::min(cands.size(), static_cast<size_t>(opt.beam));
    for (size_t c = 0; c < take; ++c) {
      const Cand& cd = cands[c];
      const LiveHyp& parent = live[static_cast<size_t>(cd.parent)];
      if (cd.token == kEos) {
        DecodedHyp done;
        done.tokens = parent.toks;
        done.asr_log_prob = cd.asr;
        done.lm_log_prob = cd.lm;
        done.fused = cd.fused;
        done.finished = true;
        consider_done(std::move(done));
        continue;
      }
      LiveHyp child = parent;  // forks the cached decoder state
      child.toks.push_back(cd.token);
      child.asr_lp = cd.asr;
      child.lm_lp = cd.lm;
      child.asr_next = stepper.step(child.asr_st, cd.token, &cross);
      if (lm_stepper) child.lm_next = lm_stepper->step(child.lm_st, cd.token, nullptr);
      next.push_back(std::move(child));
    }
    live = std::move(next);

    // Raw fused scores only fall as prefixes extend, so once the best live
    // score is beaten by a finished hypothesis the search can stop.
    if (best_done && !opt.length_normalize && !live.empty()) {
      double best_live = live[0].asr_lp + opt.lm_weight * live[0].lm_lp;
      for (const LiveHyp& h : live) {
        best_live = std::max(best_live, h.asr_lp + opt.lm_weight * h.lm_lp);
      }
      if (best_live <= best_done->fused) break;
    }
  }

  if (best_done) return *best_done;
  // Nothing reached EOS within the cap: fall back to the best live prefix.
  if (live.empty()) throw Error("beam: no hypothesis survived");
  size_t best = 0;
  double best_score = live[0].asr_lp + opt.lm_weight * live[0].lm_lp;
  for (size_t i = 1; i < live.size(); ++i) {
    const double s = live[i].asr_lp + opt.lm_weight * live[i].lm_lp;
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  DecodedHyp out;
  out.tokens = live[best].toks;
  out.asr_log_prob = live[best].asr_lp;
  out.lm_log_prob = live[best].lm_lp;
  out.fused = best_score;
  out.finished = false;
  return out;
}

}  // namespace cjt::decode
