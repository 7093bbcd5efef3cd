// analysis/pwcca.h

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

#ifndef CJT_ANALYSIS_PWCCA_H_
#define CJT_ANALYSIS_PWCCA_H_

#include <string>
#include <vector>

#include "numerics/tensor.h"

namespace cjt::analysis {

// Activations of one layer over a shared probe set: one row per datapoint,
// one column per neuron.
struct ActivationMatrix {
  cjt::numerics::Tensor<float> data;
  int layer = 0;
  std::string model_tag;
};

struct PwccaResult {
  double similarity = 0.0;        // sum(alpha_i * rho_i) / sum(alpha_i)
  std::vector<double> rho;        // canonical correlations, non-increasing
  std::vector<double> alpha;      // projection weights, same length
  double tolerance = 0.0;         // singular-value cutoff actually applied
};

// Projection-weighted canonical correlation between two activation
// matrices over the same datapoints. Both are centered internally; the
// CCA runs on SVD bases with rank truncated at 1e-6 * sigma_max, and the
// canonical directions are weighted by how much of X they explain:
// alpha_i = sum_j |<h_i, x_j>| over X's centered neuron columns x_j.
// All arithmetic is double precision. Requires rows > max(cols_x, cols_y)
// and at least rank one on each side (constant activations are an error).
PwccaResult pwcca(const cjt::numerics::Tensor<float>& x, const cjt::numerics::Tensor<float>& y);

}  // namespace cjt::analysis

#endif  // CJT_ANALYSIS_PWCCA_H_
