// numerics/tensor.h

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

#ifndef CJT_NUMERICS_TENSOR_H_
#define CJT_NUMERICS_TENSOR_H_

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace cjt::numerics {

// Dense row-major tensor. Copying a Tensor shares the underlying buffer
// (cheap handle semantics); clone() makes an independent deep copy. Code that
// hands a Tensor to a Graph must treat the buffer as frozen until the graph
// is discarded.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);  // zero-filled
  static Tensor from(std::vector<int> shape, std::vector<Real> values);
  static Tensor scalar(Real v);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  size_t numel() const;
  bool empty() const { return numel() == 0; }

  // Rank-2 accessors; throw ShapeError on other ranks.
  int rows() const;
  int cols() const;
  Real& at(int r, int c) { return row(r)[c]; }
  Real at(int r, int c) const { return row(r)[c]; }
  Real* row(int r);
  const Real* row(int r) const;

  Real* data() { return data_->data(); }
  const Real* data() const { return data_->data(); }
  Real item() const;  // requires numel()==1

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool shares_buffer(const Tensor& other) const { return data_ == other.data_; }
  bool allocated() const { return static_cast<bool>(data_); }

  Tensor clone() const;
  // Same buffer under a new shape; product of dims must match.
  Tensor reshaped(std::vector<int> shape) const;

  void fill(Real v);
  void add_in_place(const Tensor& other);  // same shape required
  bool all_finite() const;

  std::string shape_str() const;  // "[3x4]" for error messages

 private:
  std::vector<int> shape_;
  std::shared_ptr<std::vector<Real>> data_;
};

// Matrix products on rank-2 tensors. The *_into forms either overwrite or
// accumulate into `out`, which must be preallocated with the right shape.
//   mm:    out = a [m,k] * b [k,n]
//   mm_nt: out = a [m,k] * b^T, b stored [n,k]
//   mm_tn: out = a^T * b, a stored [k,m], b [k,n]
template <typename Real>
void mm_into(Tensor<Real>& out, const Tensor<Real>& a, const Tensor<Real>& b,
             bool accumulate);
template <typename Real>
void mm_nt_into(Tensor<Real>& out, const Tensor<Real>& a, const Tensor<Real>& b,
                bool accumulate);
template <typename Real>
void mm_tn_into(Tensor<Real>& out, const Tensor<Real>& a, const Tensor<Real>& b,
                bool accumulate);

template <typename Real>
Tensor<Real> mm(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real>
Tensor<Real> mm_nt(const Tensor<Real>& a, const Tensor<Real>& b);
template <typename Real>
Tensor<Real> mm_tn(const Tensor<Real>& a, const Tensor<Real>& b);

}  // namespace cjt::numerics

#endif  // CJT_NUMERICS_TENSOR_H_
