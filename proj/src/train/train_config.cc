// train/train_config.cc

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

#include "train/train_config.h"

#include "util/error.h"

namespace cjt::train {

void TrainConfig::validate() const {
  if (lambda_ratio < 0) throw ConfigError("train: lambda_ratio must be >= 0");
  schedule.validate();
  if (adam_beta1 <= 0 || adam_beta1 >= 1 || adam_beta2 <= 0 || adam_beta2 >= 1)
    throw ConfigError("train: adam betas must lie in (0, 1)");
  if (adam_eps <= 0) throw ConfigError("train: adam_eps must be positive");
  if (dropout < 0 || dropout >= 1) throw ConfigError("train: dropout must lie in [0, 1)");
  if (label_smoothing < 0 || label_smoothing >= 1)
    throw ConfigError("train: label_smoothing must lie in [0, 1)");
  if (updates_round1 < 1) throw ConfigError("train: updates_round1 must be >= 1");
  if (updates_round2 < 0) throw ConfigError("train: updates_round2 must be >= 0");
  if (updates_teacher < 1) throw ConfigError("train: updates_teacher must be >= 1");
  if (updates_lm < 1) throw ConfigError("train: updates_lm must be >= 1");
  if (mask_strategy != "conf" && mask_strategy != "thres" && mask_strategy != "rand" &&
      mask_strategy != "none")
    throw ConfigError("train: mask_strategy must be conf, thres, rand, or none");
  if (mask_prob < 0 || mask_prob > 1) throw ConfigError("train: mask_prob must lie in [0, 1]");
  if (conf_multiplier < 0) throw ConfigError("train: conf_multiplier must be >= 0");
  if (syngr_prob < 0 || syngr_prob > 1) throw ConfigError("train: syngr_prob must lie in [0, 1]");
  if (syngr_scope != "shallow" && syngr_scope != "all" && syngr_scope != "none")
    throw ConfigError("train: syngr_scope must be shallow, all, or none");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (checkpoint_interval < 1) throw ConfigError("train: checkpoint_interval must be >= 1");
  if (average_last < 1) throw ConfigError("train: average_last must be >= 1");
}

TrainConfig TrainConfig::from_kv(const cjt::util::KvConfig& cfg) {
  TrainConfig t;
  t.lambda_ratio = static_cast<int>(cfg.get_int("train.lambda_ratio", t.lambda_ratio));
  t.lambda_as_loss_weight = cfg.get_bool("train.lambda_as_loss_weight", t.lambda_as_loss_weight);
  t.schedule.peak_lr = cfg.get_double("train.peak_lr", t.schedule.peak_lr);
  t.schedule.warmup_frac = cfg.get_double("train.warmup_frac", t.schedule.warmup_frac);
  t.schedule.hold_frac = cfg.get_double("train.hold_frac", t.schedule.hold_frac);
  t.schedule.decay_frac = cfg.get_double("train.decay_frac", t.schedule.decay_frac);
  t.schedule.init_scale = cfg.get_double("train.init_lr_scale", t.schedule.init_scale);
  t.schedule.final_scale = cfg.get_double("train.final_lr_scale", t.schedule.final_scale);
  t.adam_beta1 = cfg.get_double("train.adam_beta1", t.adam_beta1);
  t.adam_beta2 = cfg.get_double("train.adam_beta2", t.adam_beta2);
  t.adam_eps = cfg.get_double("train.adam_eps", t.adam_eps);
  t.dropout = cfg.get_double("train.dropout", t.dropout);
  t.label_smoothing = cfg.get_double("train.label_smoothing", t.label_smoothing);
  t.updates_round1 = static_cast<int>(cfg.get_int("train.updates_round1", t.updates_round1));
  t.updates_round2 = static_cast<int>(cfg.get_int("train.updates_round2", t.updates_round2));
  t.updates_teacher = static_cast<int>(cfg.get_int("train.updates_teacher", t.updates_teacher));
  t.updates_lm = static_cast<int>(cfg.get_int("train.updates_lm", t.updates_lm));
  t.mask_strategy = cfg.get_string("train.mask_strategy", t.mask_strategy);
  t.mask_prob = cfg.get_double("train.mask_prob", t.mask_prob);
  t.conf_multiplier = cfg.get_double("train.conf_multiplier", t.conf_multiplier);
  t.syngr_prob = cfg.get_double("train.syngr_prob", t.syngr_prob);
  t.syngr_scope = cfg.get_string("train.syngr_scope", t.syngr_scope);
  t.syngr_round1 = cfg.get_bool("train.syngr_round1", t.syngr_round1);
  t.batch_size = static_cast<int>(cfg.get_int("train.batch_size", t.batch_size));
  t.checkpoint_interval =
      static_cast<int>(cfg.get_int("train.checkpoint_interval", t.checkpoint_interval));
  t.average_last = static_cast<int>(cfg.get_int("train.average_last", t.average_last));
  t.specaug_synth = cfg.get_bool("train.specaug_synth", t.specaug_synth);
  t.seed = static_cast<uint64_t>(cfg.get_int("train.seed", static_cast<int64_t>(t.seed)));
  t.validate();
  return t;
}

void TrainConfig::to_kv(cjt::util::KvConfig& cfg) const {
  cfg.set_int("train.lambda_ratio", lambda_ratio);
  cfg.set_bool("train.lambda_as_loss_weight", lambda_as_loss_weight);
  cfg.set_double("train.peak_lr", schedule.peak_lr);
  cfg.set_double("train.warmup_frac", schedule.warmup_frac);
  cfg.set_double("train.hold_frac", schedule.hold_frac);
  cfg.set_double("train.decay_frac", schedule.decay_frac);
  cfg.set_double("train.init_lr_scale", schedule.init_scale);
  cfg.set_double("train.final_lr_scale", schedule.final_scale);
  cfg.set_double("train.adam_beta1", adam_beta1);
  cfg.set_double("train.adam_beta2", adam_beta2);
  cfg.set_double("train.adam_eps", adam_eps);
  cfg.set_double("train.dropout", dropout);
  cfg.set_double("train.label_smoothing", label_smoothing);
  cfg.set_int("train.updates_round1", updates_round1);
  cfg.set_int("train.updates_round2", updates_round2);
  cfg.set_int("train.updates_teacher", updates_teacher);
  cfg.set_int("train.updates_lm", updates_lm);
  cfg.set("train.mask_strategy", mask_strategy);
  cfg.set_double("train.mask_prob", mask_prob);
  cfg.set_double("train.conf_multiplier", conf_multiplier);
  cfg.set_double("train.syngr_prob", syngr_prob);
  cfg.set("train.syngr_scope", syngr_scope);
  cfg.set_bool("train.syngr_round1", syngr_round1);
  cfg.set_int("train.batch_size", batch_size);
  cfg.set_int("train.checkpoint_interval", checkpoint_interval);
  cfg.set_int("train.average_last", average_last);
  cfg.set_bool("train.specaug_synth", specaug_synth);
  cfg.set_int("train.seed", static_cast<int64_t>(seed));
}

}  // namespace cjt::train
