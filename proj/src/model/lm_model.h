// model/lm_model.h

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

#ifndef CJT_MODEL_LM_MODEL_H_
#define CJT_MODEL_LM_MODEL_H_

#include <string>
#include <vector>

#include "model/checkpoint.h"
#include "model/decoder_common.h"
#include "model/model_config.h"
#include "model/param_store.h"
#include "numerics/graph.h"
#include "util/rng.h"

namespace cjt::model {

// External language model: the decoder stack without cross-attention,
// trained on text alone and used for shallow fusion during search.
class LmModel {
 public:
  explicit LmModel(const LmConfig& cfg);

  const LmConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  uint64_t fingerprint() const { return cfg_.fingerprint(); }

  void init(util::Rng& rng) { store_.init(rng); }
  Checkpoint snapshot(uint64_t updates, const std::string& round_tag) const;
  void load(const Checkpoint& ck);

  // Teacher-forced logits [len(history), vocab]; history begins with BOS.
  GraphF::Var forward(GraphF& g, const std::vector<int>& history);

  // Next-token log-probabilities after the full history (eval mode).
  std::vector<float> next_log_probs(const std::vector<int>& history);

  DecoderStepper make_stepper() const;
  DecoderLayout decoder_layout() const;

 private:
  LmConfig cfg_;
  ParamStore store_;
};

}  // namespace cjt::model

#endif  // CJT_MODEL_LM_MODEL_H_
