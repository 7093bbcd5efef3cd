// train/adam.h

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

#ifndef CJT_TRAIN_ADAM_H_
#define CJT_TRAIN_ADAM_H_

#include <map>
#include <string>

#include "model/param_store.h"
#include "numerics/tensor.h"

namespace cjt::train {

// Adam with bias correction. Moment buffers are keyed by parameter name and
// created on the first step, so the same optimizer survives parameter-store
// reloads between rounds as long as names and shapes are unchanged.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.98, double eps = 1e-9)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // One update over every parameter in the store using its accumulated
  // gradient; gradients are left untouched (caller zeroes them per step).
  void step(cjt::model::ParamStore& store, double lr);

  long long steps_taken() const { return t_; }

 private:
  struct Moments {
    cjt::numerics::Tensor<float> m;
    cjt::numerics::Tensor<float> v;
  };
  double beta1_, beta2_, eps_;
  long long t_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace cjt::train

#endif  // CJT_TRAIN_ADAM_H_
