// train/adam.cc

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

#include "train/adam.h"

#include <cmath>

#include "util/error.h"

namespace cjt::train {

void Adam::step(cjt::model::ParamStore& store, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, e] : store.entries()) {
    auto it = moments_.find(name);
    if (it == moments_.end()) {
      Moments mo;
      mo.m = cjt::numerics::Tensor<float>(e.value.shape());
      mo.v = cjt::numerics::Tensor<float>(e.value.shape());
      it = moments_.emplace(name, std::move(mo)).first;
    } else if (!it->second.m.same_shape(e.value)) {
      throw Error("adam: parameter shape changed between steps");
    }
    float* m = it->second.m.data();
    float* v = it->second.v.data();
    float* w = e.value.data();
    const float* g = e.grad.data();
    const size_t n = e.value.numel();
    for (size_t i = 0; i < n; ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * gi;
      const double vi = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      w[i] = static_cast<float>(static_cast<double>(w[i]) -
                                lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

}  // namespace cjt::train
