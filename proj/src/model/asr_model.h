// model/asr_model.h

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

#ifndef CJT_MODEL_ASR_MODEL_H_
#define CJT_MODEL_ASR_MODEL_H_

#include <string>
#include <vector>

#include "model/checkpoint.h"
#include "model/decoder_common.h"
#include "model/model_config.h"
#include "model/param_store.h"
#include "numerics/graph.h"
#include "numerics/tensor.h"
#include "util/rng.h"

namespace cjt::model {

// Encoder-decoder recognizer.
//
// Encoder: stride-2 2-D conv front-end -> linear projection to attn_dim ->
// pre-norm self-attention layers with relative key positions -> final LN.
// A gradient gate sits at the output of encoder layer resolved_shallow();
// closing it stops gradient flow into the conv front-end, the projection,
// and every layer at or below the gate, while leaving values untouched.
//
// Decoder: shared stack from decoder_common.h with cross-attention into the
// encoder memory ("dec." parameters).
class AsrModel {
 public:
  explicit AsrModel(const AsrModelConfig& cfg);

  const AsrModelConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  uint64_t fingerprint() const { return cfg_.fingerprint(); }

  void init(util::Rng& rng) { store_.init(rng); }
  Checkpoint snapshot(uint64_t updates, const std::string& round_tag) const;
  void load(const Checkpoint& ck);

  // Frame count after the strided conv front-end.
  int post_conv_frames(int frames) const;

  // Parameters on the shallow side of the gradient gate, i.e. exactly those
  // whose gradients a closed gate forces to zero.
  std::vector<std::string> shallow_param_names() const;

  struct EncodeResult {
    GraphF::Var memory = -1;           // [post-conv frames, attn_dim]
    std::vector<uint8_t> frame_mask;   // valid post-conv frames
    std::vector<GraphF::Var> taps;     // per encoder layer when requested
  };

  // Builds the encoder in `g`. feats is [frames, mel_dim]; in_frame_mask
  // marks valid input frames (empty = all). Tap activations are taken at
  // each layer output before the gate.
  EncodeResult encode(GraphF& g, const numerics::Tensor<float>& feats,
                      const std::vector<uint8_t>& in_frame_mask,
                      bool gate_open, bool want_taps);

  // Teacher-forced decoder logits [len(history), vocab]. history must begin
  // with BOS; row t conditions on history[0..t] and the memory.
  GraphF::Var decode_logits(GraphF& g, const EncodeResult& enc,
                            const std::vector<int>& history);

  // Whole forward in one graph; the common case for training steps.
  struct Forward {
    GraphF::Var logits = -1;
    EncodeResult enc;
  };
  Forward forward(GraphF& g, const numerics::Tensor<float>& feats,
                  const std::vector<int>& history, bool gate_open,
                  bool want_taps = false);

  // Eval-only encoder pass on a throwaway graph; returns the plain memory
  // matrix (and per-layer tap values when requested) for incremental
  // decoding or analysis probes.
  numerics::Tensor<float> encode_eval(const numerics::Tensor<float>& feats,
                                      std::vector<numerics::Tensor<float>>* taps = nullptr);

  // Stepper over the "dec." parameters for beam/greedy decoding.
  DecoderStepper make_stepper() const;
  DecoderLayout decoder_layout() const;

 private:
  AsrModelConfig cfg_;
  ParamStore store_;
};

}  // namespace cjt::model

#endif  // CJT_MODEL_ASR_MODEL_H_
