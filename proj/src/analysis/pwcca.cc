// analysis/pwcca.cc

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

#include "analysis/pwcca.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "util/error.h"

namespace cjt::analysis {

namespace {

Eigen::MatrixXd centered(const cjt::numerics::Tensor<float>& t) {
  Eigen::MatrixXd m(t.rows(), t.cols());
  for (int r = 0; r < t.rows(); ++r)
    for (int c = 0; c < t.cols(); ++c) m(r, c) = static_cast<double>(t.at(r, c));
  m.rowwise() -= m.colwise().mean();
  return m;
}

// Orthonormal column basis of the centered matrix, truncated at
// 1e-6 * sigma_max. Returns the rank; 0 means constant activations.
int thin_basis(const Eigen::MatrixXd& m, Eigen::MatrixXd* basis, double* tol) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  *tol = 1e-6 * s(0);
  int rank = 0;
  while (rank < s.size() && s(rank) > *tol) ++rank;
  *basis = svd.matrixU().leftCols(rank);
  return rank;
}

}  // namespace

PwccaResult pwcca(const cjt::numerics::Tensor<float>& x, const cjt::numerics::Tensor<float>& y) {
  if (x.rows() != y.rows())
    throw ShapeError("pwcca: activation matrices must cover the same datapoints");
  int n = x.rows();
  if (n <= std::max(x.cols(), y.cols()))
    throw ConfigError("pwcca: need more datapoints than the wider matrix has neurons");

  Eigen::MatrixXd cx = centered(x);
  Eigen::MatrixXd cy = centered(y);

  Eigen::MatrixXd ux, uy;
  double tol_x = 0.0, tol_y = 0.0;
  int rx = thin_basis(cx, &ux, &tol_x);
  int ry = thin_basis(cy, &uy, &tol_y);
  if (rx == 0 || ry == 0) throw Error("pwcca: constant activations have no correlation structure");

  // Correlations between the two whitened bases; the singular values of
  // Ux^T Uy are exactly the canonical correlations.
  Eigen::MatrixXd m = ux.transpose() * uy;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  const Eigen::VectorXd& s = svd.singularValues();

  PwccaResult res;
  res.tolerance = std::max(tol_x, tol_y);
  int r = static_cast<int>(s.size());
  res.rho.resize(static_cast<size_t>(r));
  res.alpha.resize(static_cast<size_t>(r));

  // Canonical directions over datapoints on X's side, weighted by the
  // magnitude of X they account for.
  Eigen::MatrixXd h = ux * svd.matrixU().leftCols(r);  // n x r, orthonormal
  Eigen::MatrixXd proj = h.transpose() * cx;           // r x d_x
  double weighted = 0.0, total = 0.0;
  for (int i = 0; i < r; ++i) {
    res.rho[static_cast<size_t>(i)] = std::clamp(s(i), 0.0, 1.0);
    res.alpha[static_cast<size_t>(i)] = proj.row(i).cwiseAbs().sum();
    weighted += res.alpha[static_cast<size_t>(i)] * res.rho[static_cast<size_t>(i)];
    total += res.alpha[static_cast<size_t>(i)];
  }
  if (total <= 0.0) throw Error("pwcca: degenerate projection weights");
  res.similarity = std::clamp(weighted / total, 0.0, 1.0);
  return res;
}

}  // namespace cjt::analysis
