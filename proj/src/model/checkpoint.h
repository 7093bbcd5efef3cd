// model/checkpoint.h

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

#ifndef CJT_MODEL_CHECKPOINT_H_
#define CJT_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "model/param_store.h"
#include "numerics/tensor.h"

namespace cjt::model {

// Self-describing parameter snapshot. File layout (little-endian):
//   u32 magic "CKP1", u64 fingerprint, u64 updates, string round_tag,
//   u32 param count, then per parameter (name order):
//   string name, u32 rank, u32 dims[rank], f32 data[numel].
// Round-trips bit-exactly.
struct Checkpoint {
  uint64_t fingerprint = 0;
  uint64_t updates = 0;
  std::string round_tag;  // teacher | cjt-round1 | cjt-round2 | lm
  std::map<std::string, cjt::numerics::Tensor<float>> params;

  static Checkpoint from_store(const ParamStore& store, uint64_t fingerprint,
                               uint64_t updates, const std::string& round_tag);
  // Copies values into an already-built store; names and shapes must match
  // the registered set exactly.
  void into_store(ParamStore& store) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

// Elementwise arithmetic mean per parameter. All checkpoints must share
// fingerprint, names, and shapes; metadata (updates, round_tag) is taken from
// the last element.
Checkpoint average_checkpoints(const std::vector<Checkpoint>& cks);

}  // namespace cjt::model

#endif  // CJT_MODEL_CHECKPOINT_H_
