// model/decoder_common.h

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

#ifndef CJT_MODEL_DECODER_COMMON_H_
#define CJT_MODEL_DECODER_COMMON_H_

#include <memory>
#include <string>
#include <vector>

#include "model/blocks.h"
#include "model/param_store.h"
#include "numerics/graph.h"

namespace cjt::model {

// One transformer decoder stack, used with a cross-attention sublayer for the
// recognizer ("dec." prefix) and without one for the language model ("lm.").
//
// Layer structure (pre-norm, residual, dropout on each residual branch):
//   x  = emb(tokens); x += drop(relu(causal_conv(x))) per front-end block
//   x += drop(SelfAttn(LN1(x)))    causal, relative key positions
//   x += drop(CrossAttn(LN2(x)))   only when has_cross
//   x += drop(FFN(LN3(x)))
//   logits = LNf(x) . out.w + out.b        out.* starts at zero
struct DecoderLayout {
  std::string prefix;  // "dec." or "lm.", trailing dot included
  int vocab = 44;
  int layers = 2;
  int conv_blocks = 1;
  int conv_kernel = 3;
  int attn_dim = 64;
  int heads = 4;
  int ffn_dim = 128;
  int rel_clip = 64;
  bool has_cross = true;
  double dropout = 0.15;
};

void register_decoder_params(ParamStore& store, const DecoderLayout& layout);

// Teacher-forced logits [len(history), vocab]; row t conditions on
// history[0..t] (and on memory when the layout has cross-attention).
// memory/memory_mask must be null for a layout without cross-attention and
// non-null with one.
GraphF::Var build_decoder_graph(GraphF& g, ParamBinder& p,
                                const DecoderLayout& layout,
                                const std::vector<int>& history,
                                const GraphF::Var* memory,
                                const std::vector<uint8_t>* memory_mask);

// --- Incremental decoding (eval only, plain tensor math, no tape) ---------

// Per-utterance constants for cross-attention: memory plus its projections
// through every layer's wk/wv, computed once and shared by all hypotheses.
struct CrossCache {
  numerics::Tensor<float> memory;                 // [frames, attn_dim]
  std::vector<uint8_t> mask;                      // valid frames (empty = all)
  std::vector<numerics::Tensor<float>> k, v;      // per layer, [frames, attn_dim]
};

// Per-hypothesis decoder state. Copyable; beam search forks it.
struct DecoderState {
  int length = 0;                                  // tokens consumed so far
  // Per layer: cached self-attention keys/values, row-major [length, attn_dim].
  std::vector<std::vector<float>> self_k, self_v;
  // Per front-end conv block: that block's input rows [length, attn_dim].
  std::vector<std::vector<float>> conv_in;
};

// Steps a decoder one token at a time against cached state. Produces the
// same log-probabilities as the graph path (up to float round-off); the
// equivalence is pinned by a test.
class DecoderStepper {
 public:
  DecoderStepper(const ParamStore& store, DecoderLayout layout);
  ~DecoderStepper();
  DecoderStepper(DecoderStepper&&) noexcept;
  DecoderStepper& operator=(DecoderStepper&&) noexcept;

  const DecoderLayout& layout() const;

  CrossCache make_cross_cache(const numerics::Tensor<float>& memory,
                              std::vector<uint8_t> mask) const;
  DecoderState initial_state() const;

  // Consumes `token`, returns log-probs [vocab] for the next position.
  // `cross` must be non-null iff the layout has cross-attention.
  std::vector<float> step(DecoderState& state, int token,
                          const CrossCache* cross) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cjt::model

#endif  // CJT_MODEL_DECODER_COMMON_H_
