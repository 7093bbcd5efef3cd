// pipeline/pipeline.h

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

#ifndef CJT_PIPELINE_PIPELINE_H_
#define CJT_PIPELINE_PIPELINE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "model/checkpoint.h"
#include "model/model_config.h"
#include "pairgen/pair_set.h"
#include "synthtask/manifest.h"
#include "synthtask/render.h"
#include "synthtask/vocab.h"
#include "train/train_config.h"
#include "util/kv_config.h"

namespace cjt::pipeline {

// Stage names in dependency order.
const std::vector<std::string>& stage_order();
int stage_pos(const std::string& name);  // ConfigError on unknown names

struct ExperimentPlan {
  cjt::util::KvConfig config;       // preset + file + overrides, merged
  std::vector<std::string> stages;  // empty = every stage
  std::string out;
  uint64_t seed = 1;
  bool force = false;  // rerun requested stages even when marked done
};

// Drives the experiment stages against one output directory:
//
//   manifests/   record sets        features/     materialized audio
//   pairs/       training pairs     checkpoints/  model snapshots
//   logs/        training logs      reports/      hypotheses, WER, curves
//   markers/     completion stamps
//
// Each stage writes a marker holding a hash of the config sections it reads,
// the run seed, and its upstream markers; a rerun skips stages whose marker
// still matches. A lock file in the output directory rejects concurrent
// runs. All stage randomness derives from the plan seed, so the same plan
// and seed reproduce every artifact byte for byte.
class Pipeline {
 public:
  explicit Pipeline(ExperimentPlan plan);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  void run();

  // const because no pipeline state changes: all effects land on disk.
  void run_stage(const std::string& name);

  const std::string& out() const { return plan_.out; }

 private:
  void gen_data();
  void train_teacher();
  void pseudolabel_stage();
  void synthesize_stage();
  void train_lm_stage();
  void cjt_round(int round);
  void score_conf_stage();
  void decode_stage();
  void score_stage();
  void analyze_stage();

  uint64_t stage_hash(const std::string& name) const;
  std::string marker_path(const std::string& name) const;
  bool stage_current(const std::string& name) const;
  void write_marker(const std::string& name) const;
  void require_stage(const std::string& dep, const std::string& for_stage) const;

  cjt::model::AsrModelConfig model_cfg() const;
  cjt::model::LmConfig lm_cfg() const;
  cjt::train::TrainConfig train_cfg(const std::string& stage_tag) const;
  cjt::synthtask::Manifest load_manifest(const std::string& name) const;
  cjt::pairgen::PairSet load_pairs(const std::string& file) const;
  cjt::model::Checkpoint require_ckpt(const std::string& file, const std::string& stage) const;
  std::string arm() const;

  ExperimentPlan plan_;
  const cjt::synthtask::Vocab& vocab_;
  cjt::synthtask::TaskParams task_;
  cjt::synthtask::Profiles profiles_;
  bool lock_held_ = false;
};

}  // namespace cjt::pipeline

#endif  // CJT_PIPELINE_PIPELINE_H_
