// train/mask.h

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

#ifndef CJT_TRAIN_MASK_H_
#define CJT_TRAIN_MASK_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pairgen/pair_set.h"

namespace cjt::train {

enum class MaskStrategy { none, rand, thres, conf };

MaskStrategy parse_mask_strategy(const std::string& name);
std::string mask_strategy_name(MaskStrategy s);

// One flag per target token of a record. A masked token is replaced by PAD
// in the decoder history and its loss position is excluded, so its actual
// value can no longer influence the update.
struct MaskPlan {
  std::vector<uint8_t> masked;

  int masked_count() const;
};

struct MaskPlans {
  std::map<std::string, MaskPlan> by_id;
  long long total_tokens = 0;
  long long masked_tokens = 0;
  double threshold = 0.0;   // thres: the selected confidence cutoff P_thres
  double multiplier = 0.0;  // conf: the resolved per-token multiplier k

  double realized_rate() const {
    return total_tokens == 0 ? 0.0 : static_cast<double>(masked_tokens) / total_tokens;
  }
};

// Decides, up front and corpus-wide, which pseudo-label tokens the second
// joint round hides. mask_prob is the target fraction:
//   thres  masks every token whose confidence p satisfies p <= P_thres,
//          where P_thres is the mask_prob-quantile of all confidences in the
//          set (sorted order, index floor(mask_prob * n)); mask_prob = 0.4
//          over confidences {0.1, 0.2, ..., 1.0} masks exactly {0.1..0.4}.
//   conf   masks token i independently with probability k * (1 - p_i),
//          clipped to 1; multiplier 0 resolves k = mask_prob / mean(1 - p)
//          so the expected rate matches mask_prob.
//   rand   masks each token independently with probability mask_prob.
//   none   masks nothing (as does mask_prob = 0 under any strategy).
// conf and thres require confidences on every record; rand does not. The
// result is a pure function of (pairs, strategy, mask_prob, multiplier,
// seed); randomized strategies draw from the "mask" stream in record order.
MaskPlans make_mask_plans(const cjt::pairgen::PairSet& pairs, MaskStrategy strategy,
                          double mask_prob, double multiplier, uint64_t seed);

}  // namespace cjt::train

#endif  // CJT_TRAIN_MASK_H_
