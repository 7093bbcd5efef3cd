// model/param_store.h

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

#ifndef CJT_MODEL_PARAM_STORE_H_
#define CJT_MODEL_PARAM_STORE_H_

#include <map>
#include <string>
#include <vector>

#include "numerics/tensor.h"
#include "util/rng.h"

namespace cjt::model {

// How a parameter is filled by init(). Uniform draws U(-scale, scale).
struct InitSpec {
  enum class Kind { zeros, ones, uniform };
  Kind kind = Kind::zeros;
  double scale = 0.0;

  static InitSpec zeros() { return {Kind::zeros, 0.0}; }
  static InitSpec ones() { return {Kind::ones, 0.0}; }
  static InitSpec uniform(double scale) { return {Kind::uniform, scale}; }
};

// Named parameter tensors with paired gradient accumulators. Registration
// order does not matter: iteration and initialization follow name order, so
// two stores built from the same config behave identically.
class ParamStore {
 public:
  struct Entry {
    cjt::numerics::Tensor<float> value;
    cjt::numerics::Tensor<float> grad;
    InitSpec init;
  };

  void add(const std::string& name, std::vector<int> shape, InitSpec init);
  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  cjt::numerics::Tensor<float>& value(const std::string& name);
  const cjt::numerics::Tensor<float>& value(const std::string& name) const;
  cjt::numerics::Tensor<float>& grad(const std::string& name);

  // Fills every parameter per its InitSpec, visiting parameters in name
  // order and drawing sequentially from `rng`, so the result is a pure
  // function of (registered set, rng state).
  void init(cjt::util::Rng& rng);
  void zero_grads();

  std::vector<std::string> names() const;
  size_t param_count() const { return entries_.size(); }
  size_t scalar_count() const;
  bool grads_all_finite() const;

  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::map<std::string, Entry>& entries() { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace cjt::model

#endif  // CJT_MODEL_PARAM_STORE_H_
