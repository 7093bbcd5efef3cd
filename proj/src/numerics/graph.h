// numerics/graph.h

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

#ifndef CJT_NUMERICS_GRAPH_H_
#define CJT_NUMERICS_GRAPH_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "numerics/tensor.h"
#include "util/rng.h"

namespace cjt::numerics {

// Reverse-mode autodiff over a tape of ops. A Graph is built for one forward
// pass, backward() replays the tape in exact reverse order, then the graph is
// discarded. Nodes are addressed by integer Var handles; backward closures
// capture handles, never node references, because the node vector reallocates
// as it grows.
//
// In eval mode no tape is recorded and stochastic ops (dropout) are identity,
// so a forward pass is cheap and deterministic.
//
// Gradients of param nodes are accumulated into caller-owned sink tensors
// when backward() finishes, which is what makes multi-record gradient
// accumulation work: run several graphs, then apply one optimizer step.
template <typename Real>
class Graph {
 public:
  enum class Mode { train, eval };
  using Var = int32_t;

  explicit Graph(Mode mode, cjt::util::Rng* dropout_rng = nullptr)
      : mode_(mode), dropout_rng_(dropout_rng) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Mode mode() const { return mode_; }

  // Leaves. input() never receives gradient; param() accumulates its gradient
  // into *sink (same shape as value) during backward().
  Var input(Tensor<Real> value);
  Var param(Tensor<Real> value, Tensor<Real>* sink);

  // out = a [m,k] * b [k,n]
  Var matmul(Var a, Var b);
  // out = a [m,k] * b^T with b stored [n,k]; the attention-score shape.
  Var matmul_nt(Var a, Var b);
  // Elementwise sum; b may also be [1,C] against a [R,C] (row broadcast).
  Var add(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise, same shape
  Var scale(Var a, Real s);
  Var relu(Var a);
  // Per-row softmax over all columns.
  Var softmax_rows(Var a);
  // Per-row softmax over permitted entries only; forbidden entries get weight
  // exactly 0. Entry (i,j) is permitted iff (key_mask empty or key_mask[j])
  // and (!causal or j <= i). A row with nothing permitted is an error.
  Var attn_softmax(Var scores, std::vector<uint8_t> key_mask, bool causal);
  // Per-row layer normalization: gain/bias are [1,C].
  Var layer_norm(Var a, Var gain, Var bias, Real eps = Real(1e-5));
  // out[t,:] = table[ids[t],:]
  Var embedding(Var table, std::vector<int> ids);
  // Single-channel 2-D convolution over x [T,F] with weight [C,KH,KW] and
  // bias [1,C], stride `stride_t` in time, stride 1 in frequency, zero 'same'
  // padding (output covers ceil(T/stride_t) frames). Output [T', F*C] with
  // column index f*C + c.
  Var conv2d(Var x, Var w, Var b, int stride_t);
  // Causal 1-D convolution over x [T,D] with weight [Dout,Din,K] and bias
  // [1,Dout]; output position t sees inputs (t-K+1..t), left-padded with 0.
  Var conv1d_causal(Var x, Var w, Var b);
  // Inverted dropout: keeps with prob 1-rate and scales by 1/(1-rate).
  // Identity (and RNG-silent) in eval mode or at rate 0.
  Var dropout(Var a, double rate);
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, int begin, int end);
  Var reshape(Var a, std::vector<int> shape);
  // Forward identity; backward passes gradient iff open, else stops it.
  Var grad_gate(Var a, bool open);
  // Relative-position score spreading: in [Tq, 2*clip+1] holds per-query
  // scores against clipped signed distances; out [Tq, Tk] with
  // out[i,j] = in[i, clamp(j-i, -clip, clip) + clip].
  Var relative_bias(Var rel_scores, int keys, int clip);

  struct CeResult {
    Var loss = -1;     // [1,1]
    int counted = 0;   // positions contributing to the mean
    bool all_excluded = false;
  };
  // Mean over non-excluded positions t of KL(q_t || softmax(logits_t)) where
  // q_t puts 1-s+s/V on targets[t] and s/V elsewhere. With s=0 this is the
  // negative log-likelihood. exclude may be empty (nothing excluded) or one
  // flag per position. All positions excluded yields a constant-0 loss and
  // the all_excluded flag.
  CeResult smoothed_cross_entropy(Var logits, const std::vector<int>& targets,
                                  double smoothing,
                                  const std::vector<uint8_t>& exclude);

  const Tensor<Real>& value(Var v) const { return nodes_[static_cast<size_t>(v)].value; }
  // Gradient received by a node in the last backward(); zeros if none reached it.
  Tensor<Real> grad_of(Var v) const;

  // Seeds d(loss)/d(loss) = seed and sweeps the tape once. The graph must not
  // be extended or re-run afterwards.
  void backward(Var loss, Real seed = Real(1));

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<Real> value;
    Tensor<Real> grad;  // unallocated until some gradient arrives
    bool needs_grad = false;
    Tensor<Real>* sink = nullptr;
    std::function<void(Graph&)> backward;
  };

  Var push(Tensor<Real> value, bool needs_grad);
  bool wants_grad(Var v) const { return nodes_[static_cast<size_t>(v)].needs_grad; }
  // Gradient accumulator of v, allocated (zeroed) on first use.
  Tensor<Real>& gbuf(Var v);
  // True if node v has received any gradient.
  bool has_grad(Var v) const { return nodes_[static_cast<size_t>(v)].grad.allocated(); }
  const Tensor<Real>& gref(Var v) const { return nodes_[static_cast<size_t>(v)].grad; }
  void check_rank2(Var v, const char* op) const;

  Mode mode_;
  cjt::util::Rng* dropout_rng_;
  std::vector<Node> nodes_;
  bool swept_ = false;
};

using GraphF = Graph<float>;
using GraphD = Graph<double>;

}  // namespace cjt::numerics

#endif  // CJT_NUMERICS_GRAPH_H_
