// pairgen/confidence.cc

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

#include "pairgen/confidence.h"

#include <algorithm>
#include <cmath>

#include "synthtask/manifest.h"
#include "synthtask/vocab.h"
#include "util/error.h"
#include "util/strings.h"

namespace cjt::pairgen {

using cjt::model::GraphF;
using cjt::numerics::Tensor;
using cjt::util::cat;

std::vector<double> token_confidences(model::AsrModel& model,
                                      const Tensor<float>& feats,
                                      const std::vector<int>& target) {
  std::vector<int> history;
  history.reserve(target.size() + 1);
  history.push_back(synthtask::kBos);
  history.insert(history.end(), target.begin(), target.end());

  GraphF g(GraphF::Mode::eval);
  const model::AsrModel::Forward fwd =
      model.forward(g, feats, history, /*gate_open=*/true);
  const Tensor<float>& logits = g.value(fwd.logits);

  std::vector<double> conf;
  conf.reserve(target.size());
  for (size_t i = 0; i < target.size(); ++i) {
    const float* row = logits.row(static_cast<int>(i));
    const int vocab = logits.cols();
    const int tok = target[i];
    if (tok < 0 || tok >= vocab) {
      throw Error(cat("confidence: token ", tok, " outside vocabulary"));
    }
    float mx = row[0];
    for (int v = 1; v < vocab; ++v) mx = std::max(mx, row[v]);
    double sum = 0.0;
    for (int v = 0; v < vocab; ++v) sum += std::exp(static_cast<double>(row[v] - mx));
    double p = std::exp(static_cast<double>(row[tok] - mx)) / sum;
    p = std::min(1.0, std::max(0.0, p));
    conf.push_back(p);
  }
  return conf;
}

void score_confidences(model::AsrModel& model, PairSet& pairs,
                       const synthtask::Profiles& profiles,
                       const synthtask::Vocab& vocab, const std::string& root) {
  for (PairRecord& r : pairs.records) {
    if (r.provenance != kProvSpeechPseL) {
      throw Error(cat("confidence scoring expects speech-PseL records, got '",
                      r.provenance, "' at ", r.id));
    }
    const Tensor<float> feats =
        synthtask::load_audio(r.audio, /*transcript=*/"", profiles, vocab, root);
    r.confidences = token_confidences(model, feats, r.target);
  }
}

}  // namespace cjt::pairgen
