// analysis/sweep.h

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

#ifndef CJT_ANALYSIS_SWEEP_H_
#define CJT_ANALYSIS_SWEEP_H_

#include <string>
#include <utility>
#include <vector>

#include "analysis/pwcca.h"
#include "model/asr_model.h"
#include "model/checkpoint.h"
#include "synthtask/manifest.h"
#include "synthtask/render.h"
#include "synthtask/vocab.h"

namespace cjt::analysis {

// Eval-mode encoder forwards over the probe utterances, in manifest order,
// until `frames` post-conv frames are gathered (fewer if the probe set is
// smaller). Returns one activation matrix per encoder layer; every model
// swept over the same probe sees exactly the same input rows.
std::vector<cjt::numerics::Tensor<float>> collect_probe_activations(
    cjt::model::AsrModel& model, const cjt::synthtask::Manifest& probe, int frames,
    const cjt::synthtask::Profiles& profiles, const cjt::synthtask::Vocab& vocab,
    const std::string& root);

struct LayerSimilarity {
  std::string model_tag;
  int layer = 0;
  double pwcca = 0.0;
};

// Per-layer similarity of each candidate against a reference trained on the
// full gold pairs, all instantiated from checkpoints onto the same layout.
std::vector<LayerSimilarity> layer_similarity_sweep(
    const std::vector<std::pair<std::string, const cjt::model::Checkpoint*>>& models,
    const cjt::model::Checkpoint& reference, const cjt::model::AsrModelConfig& layout,
    const cjt::synthtask::Manifest& probe, int frames,
    const cjt::synthtask::Profiles& profiles, const cjt::synthtask::Vocab& vocab,
    const std::string& root);

// Tab-separated (layer, model_tag, pwcca), one row per curve point.
std::string render_similarity_table(const std::vector<LayerSimilarity>& rows);

}  // namespace cjt::analysis

#endif  // CJT_ANALYSIS_SWEEP_H_
