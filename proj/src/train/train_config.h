// train/train_config.h

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

#ifndef CJT_TRAIN_TRAIN_CONFIG_H_
#define CJT_TRAIN_TRAIN_CONFIG_H_

#include <cstdint>
#include <string>

#include "train/schedule.h"
#include "util/kv_config.h"

namespace cjt::train {

// Everything the training loops read, mirrored 1:1 in the [train] config
// section. Model architecture lives in the [model]/[lm] sections.
struct TrainConfig {
  // Joint-update pattern: one speech-PseL batch followed by lambda_ratio
  // SynA-text batches. With lambda_as_loss_weight the ratio instead scales
  // the text-side loss inside a single combined update.
  int lambda_ratio = 3;
  bool lambda_as_loss_weight = false;

  TriStageSchedule schedule;  // peak 5e-4, 10/40/50 split, final scale 0.01

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;

  // Applied to the model configs built by the pipeline; the graphs
  // themselves read dropout from their own model config.
  double dropout = 0.15;
  double label_smoothing = 0.1;

  int updates_round1 = 2000;
  int updates_round2 = 0;  // 0 resolves to updates_round1 / 2
  int updates_teacher = 1500;
  int updates_lm = 1500;

  // Label masking (second joint round only; round 1 never masks).
  std::string mask_strategy = "thres";  // conf | thres | rand | none
  double mask_prob = 0.4;
  double conf_multiplier = 0.0;  // conf strategy; 0 resolves to
                                 // mask_prob / mean(1 - p)

  // Gradient restriction on SynA-text batches: the shallow-encoder gate is
  // drawn closed with probability syngr_prob. Off in round 1 unless
  // syngr_round1 is set.
  double syngr_prob = 0.7;
  std::string syngr_scope = "shallow";  // shallow | all | none
  bool syngr_round1 = false;

  int batch_size = 16;
  int checkpoint_interval = 100;  // updates between snapshots
  int average_last = 10;          // checkpoints averaged into the final model
  bool specaug_synth = false;     // also augment rendered tts audio

  uint64_t seed = 1;

  int resolved_updates_round2() const {
    return updates_round2 > 0 ? updates_round2 : updates_round1 / 2;
  }

  void validate() const;
  static TrainConfig from_kv(const cjt::util::KvConfig& cfg);
  void to_kv(cjt::util::KvConfig& cfg) const;
};

}  // namespace cjt::train

#endif  // CJT_TRAIN_TRAIN_CONFIG_H_
