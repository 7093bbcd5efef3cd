// numerics/tensor.cc

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

#include "numerics/tensor.h"

#include <cmath>
#include <cstring>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::numerics {

namespace {
size_t product(const std::vector<int>& dims) {
  size_t n = 1;
  for (int d : dims) {
    if (d < 0) throw cjt::ShapeError("negative tensor dim");
    n *= static_cast<size_t>(d);
  }
  return n;
}
}  // namespace

template <typename Real>
Tensor<Real>::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<Real>>(product(shape_), Real(0))) {}

template <typename Real>
Tensor<Real> Tensor<Real>::from(std::vector<int> shape, std::vector<Real> values) {
  if (product(shape) != values.size()) {
    throw cjt::ShapeError(cjt::util::cat("Tensor::from: ", values.size(),
                                         " values for shape of ", product(shape)));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::make_shared<std::vector<Real>>(std::move(values));
  return t;
}

template <typename Real>
Tensor<Real> Tensor<Real>::scalar(Real v) {
  return from({1, 1}, {v});
}

template <typename Real>
size_t Tensor<Real>::numel() const {
  return data_ ? data_->size() : 0;
}

template <typename Real>
int Tensor<Real>::rows() const {
  if (rank() != 2) throw cjt::ShapeError(cjt::util::cat("rows() on rank-", rank(), " tensor"));
  return shape_[0];
}

template <typename Real>
int Tensor<Real>::cols() const {
  if (rank() != 2) throw cjt::ShapeError(cjt::util::cat("cols() on rank-", rank(), " tensor"));
  return shape_[1];
}

template <typename Real>
Real* Tensor<Real>::row(int r) {
  return data_->data() + static_cast<size_t>(r) * static_cast<size_t>(cols());
}

template <typename Real>
const Real* Tensor<Real>::row(int r) const {
  return data_->data() + static_cast<size_t>(r) * static_cast<size_t>(cols());
}

template <typename Real>
Real Tensor<Real>::item() const {
  if (numel() != 1) {
    throw cjt::ShapeError(cjt::util::cat("item() on tensor of ", numel(), " values"));
  }
  return (*data_)[0];
}

template <typename Real>
Tensor<Real> Tensor<Real>::clone() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = data_ ? std::make_shared<std::vector<Real>>(*data_) : nullptr;
  return t;
}

template <typename Real>
Tensor<Real> Tensor<Real>::reshaped(std::vector<int> shape) const {
  if (product(shape) != numel()) {
    throw cjt::ShapeError(cjt::util::cat("reshape of ", shape_str(), " to ",
                                         product(shape), " values"));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

template <typename Real>
void Tensor<Real>::fill(Real v) {
  for (Real& x : *data_) x = v;
}

template <typename Real>
void Tensor<Real>::add_in_place(const Tensor& other) {
  if (!same_shape(other)) {
    throw cjt::ShapeError(cjt::util::cat("add_in_place shape mismatch: ",
                                         shape_str(), " vs ", other.shape_str()));
  }
  const Real* src = other.data();
  Real* dst = data();
  const size_t n = numel();
  for (size_t i = 0; i < n; ++i) dst[i] += src[i];
}

template <typename Real>
bool Tensor<Real>::all_finite() const {
  for (Real x : *data_) {
    if (!std::isfinite(static_cast<double>(x))) return false;
  }
  return true;
}

template <typename Real>
std::string Tensor<Real>::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  s += "]";
  return s;
}

namespace {
template <typename Real>
void check_mm(const Tensor<Real>& out, const Tensor<Real>& a, const Tensor<Real>& b,
              int m, int n, int ka, int kb, const char* op) {
  if (ka != kb) {
    throw cjt::ShapeError(cjt::util::cat(op, ": inner dims ", a.shape_str(), " vs ",
                                         b.shape_str()));
  }
  if (out.rows() != m || out.cols() != n) {
    throw cjt::ShapeError(cjt::util::cat(op, ": output ", out.shape_str(),
                                         " wants [", m, "x", n, "]"));
  }
}
}  // namespace

template <typename Real>
void mm_into(Tensor<Real>& out, const Tensor<Real>& a, const Tensor<Real>& b,
             bool accumulate) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  check_mm(out, a, b, m, n, k, b.rows(), "matmul");
  if (!accumulate) {
    std::memset(out.data(), 0, out.numel() * sizeof(Real));
  }
  for (int i = 0; i < m; ++i) {
    const Real* arow = a.row(i);
    Real* orow = out.row(i);
    for (int p = 0; p < k; ++p) {
      const Real av = arow[p];
      if (av == Real(0)) continue;
      const Real* brow = b.row(p);
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

template <typename Real>
void mm_nt_into(Tensor<Real>& out, const Tensor<Real>& a, const Tensor<Real>& b,
                bool accumulate) {
  const int m = a.rows(), k = a.cols(), n = b.rows();
  check_mm(out, a, b, m, n, k, b.cols(), "matmul_nt");
  for (int i = 0; i < m; ++i) {
    const Real* arow = a.row(i);
    Real* orow = out.row(i);
    for (int j = 0; j < n; ++j) {
      const Real* brow = b.row(j);
      Real acc = Real(0);
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] = accumulate ? orow[j] + acc : acc;
    }
  }
}

template <typename Real>
void mm_tn_into(Tensor<Real>& out, const Tensor<Real>& a, const Tensor<Real>& b,
                bool accumulate) {
  const int k = a.rows(), m = a.cols(), n = b.cols();
  check_mm(out, a, b, m, n, k, b.rows(), "matmul_tn");
  if (!accumulate) {
    std::memset(out.data(), 0, out.numel() * sizeof(Real));
  }
  for (int p = 0; p < k; ++p) {
    const Real* arow = a.row(p);
    const Real* brow = b.row(p);
    for (int i = 0; i < m; ++i) {
      const Real av = arow[i];
      if (av == Real(0)) continue;
      Real* orow = out.row(i);
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

template <typename Real>
Tensor<Real> mm(const Tensor<Real>& a, const Tensor<Real>& b) {
  Tensor<Real> out({a.rows(), b.cols()});
  mm_into(out, a, b, false);
  return out;
}

template <typename Real>
Tensor<Real> mm_nt(const Tensor<Real>& a, const Tensor<Real>& b) {
  Tensor<Real> out({a.rows(), b.rows()});
  mm_nt_into(out, a, b, false);
  return out;
}

template <typename Real>
Tensor<Real> mm_tn(const Tensor<Real>& a, const Tensor<Real>& b) {
  Tensor<Real> out({a.cols(), b.cols()});
  mm_tn_into(out, a, b, false);
  return out;
}

template class Tensor<float>;
template class Tensor<double>;

template void mm_into(Tensor<float>&, const Tensor<float>&, const Tensor<float>&, bool);
template void mm_into(Tensor<double>&, const Tensor<double>&, const Tensor<double>&, bool);
template void mm_nt_into(Tensor<float>&, const Tensor<float>&, const Tensor<float>&, bool);
template void mm_nt_into(Tensor<double>&, const Tensor<double>&, const Tensor<double>&, bool);
template void mm_tn_into(Tensor<float>&, const Tensor<float>&, const Tensor<float>&, bool);
template void mm_tn_into(Tensor<double>&, const Tensor<double>&, const Tensor<double>&, bool);
template Tensor<float> mm(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> mm(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> mm_nt(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> mm_nt(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> mm_tn(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> mm_tn(const Tensor<double>&, const Tensor<double>&);

}  // namespace cjt::numerics
