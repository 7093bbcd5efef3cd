// pipeline/presets.cc

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

#include "pipeline/presets.h"

#include "util/error.h"

namespace cjt::pipeline {

using cjt::util::KvConfig;

namespace {

void paper_knobs(KvConfig& c) {
  c.set_int("train.lambda_ratio", 3);
  c.set("train.mask_strategy", "thres");
  c.set_double("train.mask_prob", 0.4);
  c.set_double("train.syngr_prob", 0.7);
  c.set("train.syngr_scope", "shallow");
  c.set_double("decode.lm_weight", 0.4);
  c.set_int("decode.beam", 20);
}

KvConfig tiny() {
  KvConfig c;
  c.set_int("corpus.paired_n", 40);
  c.set_int("corpus.unpaired_speech_n", 120);
  c.set_int("corpus.unpaired_text_n", 400);
  c.set_int("corpus.eval_n", 20);
  c.set_int("corpus.max_len", 8);
  c.set_int("train.updates_teacher", 150);
  c.set_int("train.updates_round1", 150);
  c.set_int("train.updates_round2", 0);
  c.set_int("train.updates_lm", 120);
  c.set_int("train.batch_size", 8);
  c.set_int("train.checkpoint_interval", 25);
  c.set_int("train.average_last", 5);
  c.set_int("pairgen.beam", 4);
  c.set_int("decode.beam", 8);
  c.set_int("analysis.probe_frames", 768);
  return c;
}

KvConfig small() {
  KvConfig c;
  c.set_int("corpus.paired_n", 200);
  c.set_int("corpus.unpaired_speech_n", 5000);
  c.set_int("corpus.unpaired_text_n", 20000);
  c.set_int("corpus.eval_n", 100);
  c.set_int("train.updates_teacher", 1200);
  c.set_int("train.updates_round1", 2000);
  c.set_int("train.updates_round2", 0);
  c.set_int("train.updates_lm", 1500);
  c.set_int("train.batch_size", 16);
  c.set_int("train.checkpoint_interval", 100);
  c.set_int("train.average_last", 10);
  c.set_int("pairgen.beam", 4);
  c.set_int("decode.beam", 20);
  c.set_int("analysis.probe_frames", 4000);
  return c;
}

KvConfig medium() {
  KvConfig c;
  c.set_int("corpus.paired_n", 400);
  c.set_int("corpus.unpaired_speech_n", 10000);
  c.set_int("corpus.unpaired_text_n", 40000);
  c.set_int("corpus.eval_n", 200);
  c.set_int("train.updates_teacher", 4000);
  c.set_int("train.updates_round1", 8000);
  c.set_int("train.updates_round2", 0);
  c.set_int("train.updates_lm", 6000);
  c.set_int("train.batch_size", 16);
  c.set_int("train.checkpoint_interval", 200);
  c.set_int("train.average_last", 10);
  c.set_int("pairgen.beam", 4);
  c.set_int("decode.beam", 20);
  c.set_int("analysis.probe_frames", 10000);
  return c;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"tiny", "small", "medium", "paper-defaults"};
  return names;
}

KvConfig preset_config(const std::string& name) {
  if (name == "tiny") return tiny();
  if (name == "small") return small();
  if (name == "medium") return medium();
  if (name == "paper-defaults") {
    KvConfig c = small();
    paper_knobs(c);
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (tiny, small, medium, paper-defaults)");
}

}  // namespace cjt::pipeline
