// train/schedule.cc

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

#include "train/schedule.h"

#include <cmath>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::train {

void TriStageSchedule::validate() const {
  const double sum = warmup_frac + hold_frac + decay_frac;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError(cjt::util::cat("schedule fractions sum to ", sum, ", want 1"));
  }
  if (peak_lr <= 0.0) throw ConfigError("peak_lr must be positive");
  if (init_scale <= 0.0 || init_scale > 1.0 || final_scale <= 0.0 || final_scale > 1.0) {
    throw ConfigError("schedule scales must be in (0,1]");
  }
}

double TriStageSchedule::lr_at(long long update, long long total) const {
  if (total < 1) throw Error("lr_at: total must be >= 1");
  if (update < 0 || update > total) {
    throw Error(cjt::util::cat("lr_at: update ", update, " outside [0,", total, "]"));
  }
  const double warm_end = warmup_frac * static_cast<double>(total);
  const double hold_end = (warmup_frac + hold_frac) * static_cast<double>(total);
  const double u = static_cast<double>(update);
  if (u < warm_end) {
    const double frac = u / warm_end;
    return peak_lr * (init_scale + (1.0 - init_scale) * frac);
  }
  if (u <= hold_end) return peak_lr;
  const double span = static_cast<double>(total) - hold_end;
  const double frac = (u - hold_end) / span;  // 0 at hold end, 1 at total
  return peak_lr * std::pow(final_scale, frac);
}

}  // namespace cjt::train
