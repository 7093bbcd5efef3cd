// train/batcher.h

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

#ifndef CJT_TRAIN_BATCHER_H_
#define CJT_TRAIN_BATCHER_H_

#include <cstdint>
#include <string>
#include <vector>

namespace cjt::train {

// Length-bucketed deterministic batching: records are ordered by target
// length with ties broken by a per-epoch random key, sliced into contiguous
// batches, and the batch order is then shuffled. The layout is a pure
// function of (lengths, batch_size, seed, set_name, epoch); randomness comes
// from the "batch.<set>.<epoch>" stream.
std::vector<std::vector<int>> epoch_batches(const std::vector<int>& lengths, int batch_size,
                                            uint64_t seed, const std::string& set_name,
                                            long long epoch);

// Hands out batches one at a time, building a fresh epoch layout whenever
// the previous one is exhausted.
class BatchCursor {
 public:
  BatchCursor(std::vector<int> lengths, int batch_size, uint64_t seed, std::string set_name);

  const std::vector<int>& next();
  long long epoch() const { return epoch_; }

 private:
  std::vector<int> lengths_;
  int batch_size_;
  uint64_t seed_;
  std::string set_name_;
  long long epoch_ = -1;
  size_t cursor_ = 0;
  std::vector<std::vector<int>> batches_;
};

}  // namespace cjt::train

#endif  // CJT_TRAIN_BATCHER_H_
