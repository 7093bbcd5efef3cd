// train/batcher.cc

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

#include "train/batcher.h"

#include <algorithm>
#include <tuple>
#include <utility>

#include "util/error.h"
#include "util/rng.h"
#include "util/strings.h"

namespace cjt::train {

using cjt::util::Rng;

std::vector<std::vector<int>> epoch_batches(const std::vector<int>& lengths, int batch_size,
                                            uint64_t seed, const std::string& set_name,
                                            long long epoch) {
  if (lengths.empty()) throw ConfigError("cannot batch an empty set '" + set_name + "'");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");

  Rng rng(cjt::util::derive_seed(seed, "batch." + set_name + "." + std::to_string(epoch)));

  // (length, random key, index): equal-length runs shuffle, buckets stay
  // contiguous so batch members have similar length.
  std::vector<std::tuple<int, uint64_t, int>> keyed;
  keyed.reserve(lengths.size());
  for (size_t i = 0; i < lengths.size(); ++i)
    keyed.emplace_back(lengths[i], rng.next_u64(), static_cast<int>(i));
  std::sort(keyed.begin(), keyed.end());

  std::vector<std::vector<int>> batches;
  for (size_t start = 0; start < keyed.size(); start += static_cast<size_t>(batch_size)) {
    size_t stop = std::min(keyed.size(), start + static_cast<size_t>(batch_size));
    std::vector<int> batch;
    batch.reserve(stop - start);
    for (size_t i = start; i < stop; ++i) batch.push_back(std::get<2>(keyed[i]));
    batches.push_back(std::move(batch));
  }
  for (size_t i = batches.size(); i > 1; --i) {
    auto j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
    std::swap(batches[i - 1], batches[j]);
  }
  return batches;
}

BatchCursor::BatchCursor(std::vector<int> lengths, int batch_size, uint64_t seed,
                         std::string set_name)
    : lengths_(std::move(lengths)),
      batch_size_(batch_size),
      seed_(seed),
      set_name_(std::move(set_name)) {
  if (lengths_.empty())
    throw ConfigError("empty pair set scheduled for training slot '" + set_name_ + "'");
}

const std::vector<int>& BatchCursor::next() {
  if (cursor_ >= batches_.size()) {
    ++epoch_;
    batches_ = epoch_batches(lengths_, batch_size_, seed_, set_name_, epoch_);
    cursor_ = 0;
  }
  return batches_[cursor_++];
}

}  // namespace cjt::train
