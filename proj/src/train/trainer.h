// train/trainer.h

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

#ifndef CJT_TRAIN_TRAINER_H_
#define CJT_TRAIN_TRAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "model/asr_model.h"
#include "model/checkpoint.h"
#include "model/lm_model.h"
#include "pairgen/pair_set.h"
#include "synthtask/render.h"
#include "synthtask/spec_augment.h"
#include "synthtask/vocab.h"
#include "train/mask.h"
#include "train/train_config.h"
#include "util/rng.h"

namespace cjt::train {

// Draws the gradient-restriction gate for SynA-text batches: closed with
// probability close_prob, open otherwise. Speech batches never consult it.
class GatePolicy {
 public:
  GatePolicy(uint64_t seed, const std::string& stream, double close_prob);
  bool draw_open();

 private:
  cjt::util::Rng rng_;
  double close_prob_;
};

struct TrainLogEntry {
  long long update = 0;     // 1-based position in the run
  std::string provenance;   // batch provenance; "joint" in loss-weight mode
  double loss = 0.0;
  double lr = 0.0;
  bool gate_open = true;
  double mask_rate = 0.0;   // realized mask rate of this update's targets
};

// Line-delimited: update, provenance, loss, lr, gate state, mask rate.
std::string render_train_log(const std::vector<TrainLogEntry>& log);

struct RoundResult {
  std::vector<cjt::model::Checkpoint> checkpoints;  // periodic + final
  cjt::model::Checkpoint averaged;  // mean of the last average_last snapshots
  std::vector<TrainLogEntry> log;
};

// Runs training rounds over one recognizer. Every run is self-contained:
// its randomness derives from (cfg.seed, round tag), so the same
// configuration and seed reproduce the same checkpoints bit for bit.
class Trainer {
 public:
  Trainer(cjt::model::AsrModel& model, const TrainConfig& cfg,
          const cjt::synthtask::Profiles& profiles, const cjt::synthtask::Vocab& vocab,
          std::string root);

  // Plain supervised training on gold pairs (the joint loop with ratio 0).
  RoundResult train_supervised(const cjt::pairgen::PairSet& gold, int updates,
                               const std::string& tag);

  // One joint round over speech-PseL and SynA-text pairs. Batches follow
  // the repeating pattern [1 speech, lambda_ratio text]. Round 1 trains on
  // unmasked pseudo-labels and leaves the gate alone unless syngr_round1;
  // round 2 applies the mask plans to the speech side and draws the gate on
  // every text batch. plans must be null in round 1 and, when the strategy
  // is not "none", non-null in round 2.
  RoundResult run_round(const cjt::pairgen::PairSet& speech, const cjt::pairgen::PairSet& text,
                        int round, const MaskPlans* plans, int updates, const std::string& tag);

  struct StepStats {
    double loss = 0.0;       // mean per-record loss over the batch
    double mask_rate = 0.0;  // masked / target tokens in the batch
    long long target_tokens = 0;
    long long masked_tokens = 0;
  };

  // Builds one graph per record of a homogeneous-provenance batch and
  // accumulates gradients scaled by loss_scale into the parameter store
  // (which the caller has zeroed). Public so property tests can drive a
  // single batch with a forced gate state.
  StepStats accumulate(const cjt::pairgen::PairSet& pairs, const std::vector<int>& batch,
                       bool gate_open, const MaskPlans* plans, double loss_scale,
                       cjt::util::Rng& dropout_rng, cjt::util::Rng& specaug_rng);

  cjt::synthtask::SpecAugmentPolicy& specaug_policy() { return specaug_; }

 private:
  RoundResult run_with(const TrainConfig& cfg, const cjt::pairgen::PairSet& speech,
                       const cjt::pairgen::PairSet* text, bool syngr_active,
                       const MaskPlans* plans, int updates, const std::string& tag);
  void fault_dump(const std::string& tag, long long update, const std::string& provenance,
                  double loss, double lr) const;

  cjt::model::AsrModel& model_;
  TrainConfig cfg_;
  const cjt::synthtask::Profiles& profiles_;
  const cjt::synthtask::Vocab& vocab_;
  std::string root_;
  cjt::synthtask::SpecAugmentPolicy specaug_;
  std::vector<std::string> last_batch_ids_;  // for fault diagnostics
};

// Decoder-only language-model training over encoded transcripts. Follows
// the same schedule, optimizer, checkpointing, and averaging rules as the
// recognizer rounds. root may be empty (fault dumps are skipped).
RoundResult train_lm(cjt::model::LmModel& lm, const std::vector<std::vector<int>>& sequences,
                     const TrainConfig& cfg, const std::string& root, const std::string& tag);

}  // namespace cjt::train

#endif  // CJT_TRAIN_TRAINER_H_
