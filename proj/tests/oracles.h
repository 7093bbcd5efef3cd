// tests/oracles.h

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

#ifndef CJT_TESTS_ORACLES_H_
#define CJT_TESTS_ORACLES_H_

// Independent reference implementations the suites compare the production
// code against: central finite differences for gradients, direct summation
// for the smoothed cross-entropy, exhaustive recursion for edit distance,
// and a covariance-whitening route to canonical correlations. Each is
// written the slow, obvious way on purpose and shares no code with src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "numerics/graph.h"
#include "numerics/tensor.h"
#include "util/rng.h"

namespace cjt::tests {

using TensorD = cjt::numerics::Tensor<double>;
using GraphD = cjt::numerics::GraphD;

// Seed handed to every graph built by the finite-difference driver, so that
// stochastic ops (dropout) replay the same mask in the analytic pass and in
// every perturbed evaluation.
inline constexpr uint64_t kFdGraphSeed = 0x5eedf00du;

// Builds a scalar loss over the given leaf variables. Must be a pure
// function of the leaf values; all other randomness has to be baked into
// captured constants.
using LossBuilder =
    std::function<GraphD::Var(GraphD&, const std::vector<GraphD::Var>&)>;

inline double fd_eval_loss(const std::vector<TensorD>& inputs, const LossBuilder& build) {
  cjt::util::Rng rng(kFdGraphSeed);
  GraphD g(GraphD::Mode::train, &rng);
  std::vector<GraphD::Var> vars;
  vars.reserve(inputs.size());
  for (const TensorD& t : inputs) vars.push_back(g.input(t));
  return g.value(build(g, vars)).item();
}

struct FdReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
};

// Central finite differences against the reverse-mode gradient, 64-bit.
// The relative error uses |a| + |n| as scale with a floor, so near-zero
// gradient entries are judged on absolute error.
inline FdReport fd_check(std::vector<TensorD> inputs, const LossBuilder& build,
                         double h = 1e-5, double scale_floor = 1e-3) {
  std::vector<TensorD> sinks;
  sinks.reserve(inputs.size());
  for (const TensorD& t : inputs) sinks.emplace_back(t.shape());
  {
    cjt::util::Rng rng(kFdGraphSeed);
    GraphD g(GraphD::Mode::train, &rng);
    std::vector<GraphD::Var> vars;
    for (size_t i = 0; i < inputs.size(); ++i) vars.push_back(g.param(inputs[i], &sinks[i]));
    g.backward(build(g, vars));
  }
  FdReport rep;
  for (size_t i = 0; i < inputs.size(); ++i) {
    double* data = inputs[i].data();
    for (size_t e = 0; e < inputs[i].numel(); ++e) {
      const double orig = data[e];
      data[e] = orig + h;
      const double lp = fd_eval_loss(inputs, build);
      data[e] = orig - h;
      const double lm = fd_eval_loss(inputs, build);
      data[e] = orig;
      const double numeric = (lp - lm) / (2.0 * h);
      const double analytic = sinks[i].data()[e];
      const double abs_err = std::abs(analytic - numeric);
      const double rel_err =
          abs_err / std::max(std::abs(analytic) + std::abs(numeric), scale_floor);
      rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
      rep.max_rel_err = std::max(rep.max_rel_err, rel_err);
    }
  }
  return rep;
}

// Label-smoothing loss by direct per-class summation:
// mean over non-excluded rows of sum_j q_j * (log q_j - log softmax_j),
// with q putting 1 - s + s/V on the target and s/V elsewhere.
inline double smoothed_ce_oracle(const TensorD& logits, const std::vector<int>& targets,
                                 double smoothing, const std::vector<uint8_t>& exclude) {
  const int rows = logits.rows();
  const int vocab = logits.cols();
  double total = 0.0;
  int counted = 0;
  for (int t = 0; t < rows; ++t) {
    if (!exclude.empty() && exclude[static_cast<size_t>(t)]) continue;
    const double* x = logits.row(t);
    double mx = x[0];
    for (int v = 1; v < vocab; ++v) mx = std::max(mx, x[v]);
    double sum = 0.0;
    for (int v = 0; v < vocab; ++v) sum += std::exp(x[v] - mx);
    const double lse = mx + std::log(sum);
    for (int v = 0; v < vocab; ++v) {
      const double q = smoothing / vocab +
                       (v == targets[static_cast<size_t>(t)] ? 1.0 - smoothing : 0.0);
      if (q > 0.0) total += q * (std::log(q) - (x[v] - lse));
    }
    ++counted;
  }
  return counted == 0 ? 0.0 : total / counted;
}

// Plain three-way recursion, no memoization; exponential and only meant for
// short sequences.
inline int edit_distance_recursive(const std::vector<int>& a, const std::vector<int>& b,
                                   size_t i = 0, size_t j = 0) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  int best = edit_distance_recursive(a, b, i + 1, j + 1) + (a[i] != b[j] ? 1 : 0);
  best = std::min(best, edit_distance_recursive(a, b, i + 1, j) + 1);
  best = std::min(best, edit_distance_recursive(a, b, i, j + 1) + 1);
  return best;
}

struct CcaOracleResult {
  std::vector<double> rho;
  double pwcca = 0.0;
};

// Canonical correlations via explicit covariance whitening and an
// eigendecomposition-based inverse square root, then projection weighting
// on X's side. Requires both inputs to be full column rank.
inline CcaOracleResult cca_whitening_oracle(const cjt::numerics::Tensor<float>& xf,
                                            const cjt::numerics::Tensor<float>& yf) {
  const int n = xf.rows();
  const int dx = xf.cols();
  const int dy = yf.cols();
  Eigen::MatrixXd x(n, dx), y(n, dy);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < dx; ++c) x(r, c) = static_cast<double>(xf.at(r, c));
    for (int c = 0; c < dy; ++c) y(r, c) = static_cast<double>(yf.at(r, c));
  }
  x.rowwise() -= x.colwise().mean();
  y.rowwise() -= y.colwise().mean();

  auto inv_sqrt = [](const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    Eigen::VectorXd l = es.eigenvalues();
    for (int i = 0; i < l.size(); ++i) l(i) = 1.0 / std::sqrt(l(i));
    return Eigen::MatrixXd(es.eigenvectors() * l.asDiagonal() *
                           es.eigenvectors().transpose());
  };
  const Eigen::MatrixXd wx = inv_sqrt(x.transpose() * x);
  const Eigen::MatrixXd wy = inv_sqrt(y.transpose() * y);
  const Eigen::MatrixXd m = wx * (x.transpose() * y) * wy;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);

  CcaOracleResult res;
  const int r = static_cast<int>(svd.singularValues().size());
  for (int i = 0; i < r; ++i) {
    res.rho.push_back(std::clamp(svd.singularValues()(i), 0.0, 1.0));
  }
  const Eigen::MatrixXd h = x * wx * svd.matrixU();  // orthonormal columns
  double num = 0.0, den = 0.0;
  for (int i = 0; i < r; ++i) {
    double alpha = 0.0;
    for (int j = 0; j < dx; ++j) alpha += std::abs(h.col(i).dot(x.col(j)));
    num += alpha * res.rho[static_cast<size_t>(i)];
    den += alpha;
  }
  res.pwcca = den == 0.0 ? 0.0 : num / den;
  return res;
}

}  // namespace cjt::tests

#endif  // CJT_TESTS_ORACLES_H_
