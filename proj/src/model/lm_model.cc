// model/lm_model.cc

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

#include "model/lm_model.h"

#include "synthtask/vocab.h"
#include "util/error.h"
#include "util/strings.h"

namespace cjt::model {

using cjt::util::cat;
using cjt::Error;

LmModel::LmModel(const LmConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  register_decoder_params(store_, decoder_layout());
}

DecoderLayout LmModel::decoder_layout() const {
  DecoderLayout L;
  L.prefix = "lm.";
  L.vocab = cfg_.vocab_size;
  L.layers = cfg_.layers;
  L.conv_blocks = cfg_.conv_blocks;
  L.conv_kernel = cfg_.conv_kernel;
  L.attn_dim = cfg_.attn_dim;
  L.heads = cfg_.heads;
  L.ffn_dim = cfg_.ffn_dim;
  L.rel_clip = cfg_.rel_clip;
  L.has_cross = false;
  L.dropout = cfg_.dropout;
  return L;
}

Checkpoint LmModel::snapshot(uint64_t updates, const std::string& round_tag) const {
  return Checkpoint::from_store(store_, fingerprint(), updates, round_tag);
}

void LmModel::load(const Checkpoint& ck) {
  if (ck.fingerprint != fingerprint()) {
    throw Error(cat("checkpoint fingerprint ", ck.fingerprint,
                    " does not match language model ", fingerprint()));
  }
  ck.into_store(store_);
}

GraphF::Var LmModel::forward(GraphF& g, const std::vector<int>& history) {
  if (history.empty() || history.front() != synthtask::kBos) {
    throw Error("lm forward: history must begin with BOS");
  }
  ParamBinder p(g, store_);
  return build_decoder_graph(g, p, decoder_layout(), history,
                             /*memory=*/nullptr, /*memory_mask=*/nullptr);
}

std::vector<float> LmModel::next_log_probs(const std::vector<int>& history) {
  if (history.empty() || history.front() != synthtask::kBos) {
    throw Error("lm scoring: history must begin with BOS");
  }
  DecoderStepper stepper = make_stepper();
  DecoderState st = stepper.initial_state();
  std::vector<float> lp;
  for (int tok : history) lp = stepper.step(st, tok, nullptr);
  return lp;
}

DecoderStepper LmModel::make_stepper() const {
  return DecoderStepper(store_, decoder_layout());
}

}  // namespace cjt::model
