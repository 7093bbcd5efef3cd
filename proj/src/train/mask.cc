// train/mask.cc

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

#include "train/mask.h"

#include <algorithm>
#include <cmath>

#include "util/error.h"
#include "util/rng.h"

namespace cjt::train {

using cjt::pairgen::PairRecord;
using cjt::pairgen::PairSet;
using cjt::util::Rng;

MaskStrategy parse_mask_strategy(const std::string& name) {
  if (name == "none") return MaskStrategy::none;
  if (name == "rand") return MaskStrategy::rand;
  if (name == "thres") return MaskStrategy::thres;
  if (name == "conf") return MaskStrategy::conf;
  throw ConfigError("unknown mask strategy '" + name + "'");
}

std::string mask_strategy_name(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::none:
      return "none";
    case MaskStrategy::rand:
      return "rand";
    case MaskStrategy::thres:
      return "thres";
    case MaskStrategy::conf:
      return "conf";
  }
  throw Error("unreachable mask strategy");
}

int MaskPlan::masked_count() const {
  int n = 0;
  for (uint8_t f : masked) n += f != 0;
  return n;
}

namespace {

void require_confidences(const PairSet& pairs, const std::string& strategy) {
  for (const PairRecord& r : pairs.records) {
    if (r.confidences.size() != r.target.size())
      throw ConfigError("mask strategy '" + strategy + "' needs a confidence per token but '" +
                        r.id + "' is unscored");
  }
}

}  // namespace

MaskPlans make_mask_plans(const PairSet& pairs, MaskStrategy strategy, double mask_prob,
                          double multiplier, uint64_t seed) {
  if (mask_prob < 0.0 || mask_prob > 1.0) throw ConfigError("mask_prob must lie in [0, 1]");
  if (multiplier < 0.0) throw ConfigError("confidence multiplier must be >= 0");

  MaskPlans out;
  for (const PairRecord& r : pairs.records) {
    out.by_id[r.id] = MaskPlan{std::vector<uint8_t>(r.target.size(), 0)};
    out.total_tokens += static_cast<long long>(r.target.size());
  }
  if (strategy == MaskStrategy::none || mask_prob == 0.0 || out.total_tokens == 0) return out;

  if (strategy == MaskStrategy::rand) {
    Rng rng(cjt::util::derive_seed(seed, "mask"));
    for (const PairRecord& r : pairs.records) {
      MaskPlan& plan = out.by_id[r.id];
      for (size_t i = 0; i < r.target.size(); ++i)
        if (rng.bernoulli(mask_prob)) plan.masked[i] = 1;
      out.masked_tokens += plan.masked_count();
    }
    return out;
  }

  require_confidences(pairs, mask_strategy_name(strategy));

  if (strategy == MaskStrategy::thres) {
    std::vector<double> all;
    all.reserve(static_cast<size_t>(out.total_tokens));
    for (const PairRecord& r : pairs.records)
      all.insert(all.end(), r.confidences.begin(), r.confidences.end());
    std::sort(all.begin(), all.end());
    // Sorted-order quantile: the cutoff is the k-th smallest confidence with
    // k = floor(mask_prob * n); the epsilon keeps an exact product such as
    // 0.4 * 10 from landing just below its integer.
    auto k = static_cast<size_t>(std::floor(mask_prob * static_cast<double>(all.size()) + 1e-9));
    if (k == 0) return out;
    out.threshold = all[k - 1];
    for (const PairRecord& r : pairs.records) {
      MaskPlan& plan = out.by_id[r.id];
      for (size_t i = 0; i < r.confidences.size(); ++i)
        if (r.confidences[i] <= out.threshold) plan.masked[i] = 1;
      out.masked_tokens += plan.masked_count();
    }
    return out;
  }

  // conf: Bernoulli(k * (1 - p)) per token.
  double k = multiplier;
  if (k == 0.0) {
    double sum = 0.0;
    for (const PairRecord& r : pairs.records)
      for (double p : r.confidences) sum += 1.0 - p;
    double mean = sum / static_cast<double>(out.total_tokens);
    if (mean <= 0.0) return out;  // every token fully confident; nothing to mask
    k = mask_prob / mean;
  }
  out.multiplier = k;
  Rng rng(cjt::util::derive_seed(seed, "mask"));
  for (const PairRecord& r : pairs.records) {
    MaskPlan& plan = out.by_id[r.id];
    for (size_t i = 0; i < r.confidences.size(); ++i) {
      double p_mask = std::min(1.0, k * (1.0 - r.confidences[i]));
      if (rng.bernoulli(p_mask)) plan.masked[i] = 1;
    }
    out.masked_tokens += plan.masked_count();
  }
  return out;
}

}  // namespace cjt::train
