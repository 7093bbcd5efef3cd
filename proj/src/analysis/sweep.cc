// analysis/sweep.cc

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

#include "analysis/sweep.h"

#include <sstream>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::analysis {

using cjt::numerics::Tensor;

std::vector<Tensor<float>> collect_probe_activations(cjt::model::AsrModel& model,
                                                     const cjt::synthtask::Manifest& probe,
                                                     int frames,
                                                     const cjt::synthtask::Profiles& profiles,
                                                     const cjt::synthtask::Vocab& vocab,
                                                     const std::string& root) {
  if (frames < 1) throw ConfigError("probe frame count must be >= 1");
  if (probe.records.empty()) throw ConfigError("probe manifest is empty");

  int layers = model.config().enc_layers;
  int d = model.config().attn_dim;
  // Tensor copies share storage, so build each layer's matrix separately.
  std::vector<Tensor<float>> out;
  out.reserve(static_cast<size_t>(layers));
  for (int l = 0; l < layers; ++l) out.emplace_back(std::vector<int>{frames, d});
  int filled = 0;
  for (const auto& rec : probe.records) {
    if (filled >= frames) break;
    Tensor<float> feats =
        cjt::synthtask::load_audio(rec.audio, rec.transcript, profiles, vocab, root);
    std::vector<Tensor<float>> taps;
    model.encode_eval(feats, &taps);
    int take = std::min(taps[0].rows(), frames - filled);
    for (int l = 0; l < layers; ++l)
      for (int r = 0; r < take; ++r)
        for (int c = 0; c < d; ++c)
          out[static_cast<size_t>(l)].at(filled + r, c) = taps[static_cast<size_t>(l)].at(r, c);
    filled += take;
  }
  if (filled < frames) {
    // Small probe set: shrink to what it actually yielded.
    std::vector<Tensor<float>> trimmed;
    trimmed.reserve(static_cast<size_t>(layers));
    for (int l = 0; l < layers; ++l) trimmed.emplace_back(std::vector<int>{filled, d});
    for (int l = 0; l < layers; ++l)
      for (int r = 0; r < filled; ++r)
        for (int c = 0; c < d; ++c)
          trimmed[static_cast<size_t>(l)].at(r, c) = out[static_cast<size_t>(l)].at(r, c);
    return trimmed;
  }
  return out;
}

std::vector<LayerSimilarity> layer_similarity_sweep(
    const std::vector<std::pair<std::string, const cjt::model::Checkpoint*>>& models,
    const cjt::model::Checkpoint& reference, const cjt::model::AsrModelConfig& layout,
    const cjt::synthtask::Manifest& probe, int frames,
    const cjt::synthtask::Profiles& profiles, const cjt::synthtask::Vocab& vocab,
    const std::string& root) {
  cjt::model::AsrModel ref_model(layout);
  ref_model.load(reference);
  std::vector<Tensor<float>> ref_acts =
      collect_probe_activations(ref_model, probe, frames, profiles, vocab, root);

  std::vector<LayerSimilarity> rows;
  for (const auto& [tag, ck] : models) {
    cjt::model::AsrModel m(layout);
    m.load(*ck);
    std::vector<Tensor<float>> acts = collect_probe_activations(m, probe, frames, profiles,
                                                                vocab, root);
    for (size_t l = 0; l < acts.size(); ++l) {
      PwccaResult r = pwcca(acts[l], ref_acts[l]);
      rows.push_back({tag, static_cast<int>(l), r.similarity});
    }
  }
  return rows;
}

std::string render_similarity_table(const std::vector<LayerSimilarity>& rows) {
  std::ostringstream os;
  os << "# layer\tmodel_tag\tpwcca\n";
  for (const LayerSimilarity& r : rows)
    os << r.layer << '\t' << r.model_tag << '\t' << cjt::util::fmt_fixed(r.pwcca, 6) << '\n';
  return os.str();
}

}  // namespace cjt::analysis
