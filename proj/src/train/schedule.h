// train/schedule.h

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

#ifndef CJT_TRAIN_SCHEDULE_H_
#define CJT_TRAIN_SCHEDULE_H_

namespace cjt::train {

// Tri-stage learning-rate schedule: linear warmup from init_scale*peak to
// peak over the first warmup_frac of updates, flat at peak through
// warmup_frac+hold_frac, then exponential decay hitting final_scale*peak
// exactly at update == total.
struct TriStageSchedule {
  double peak_lr = 5e-4;
  double warmup_frac = 0.1;
  double hold_frac = 0.4;
  double decay_frac = 0.5;
  double init_scale = 0.01;   // lr at update 0, as a fraction of peak
  double final_scale = 0.01;  // lr at update total, as a fraction of peak

  // 0 <= update <= total; total >= 1.
  double lr_at(long long update, long long total) const;
  void validate() const;  // fractions must sum to 1, scales in (0,1]
};

}  // namespace cjt::train

#endif  // CJT_TRAIN_SCHEDULE_H_
