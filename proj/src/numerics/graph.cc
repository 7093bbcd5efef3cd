// numerics/graph.cc

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

#include "numerics/graph.h"

#include <cmath>
#include <cstring>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::numerics {

using cjt::util::cat;

template <typename Real>
typename Graph<Real>::Var Graph<Real>::push(Tensor<Real> value, bool needs_grad) {
  if (swept_) throw Error("graph extended after backward()");
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad && mode_ == Mode::train;
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

template <typename Real>
Tensor<Real>& Graph<Real>::gbuf(Var v) {
  Node& n = nodes_[static_cast<size_t>(v)];
  if (!n.grad.allocated()) n.grad = Tensor<Real>(n.value.shape());
  return n.grad;
}

template <typename Real>
void Graph<Real>::check_rank2(Var v, const char* op) const {
  if (value(v).rank() != 2) {
    throw ShapeError(cat(op, ": expected rank-2 tensor, got ", value(v).shape_str()));
  }
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::input(Tensor<Real> value) {
  return push(std::move(value), false);
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::param(Tensor<Real> value, Tensor<Real>* sink) {
  if (mode_ == Mode::eval) return push(std::move(value), false);
  if (sink == nullptr) throw Error("param() needs a gradient sink in train mode");
  if (!sink->allocated() || !sink->same_shape(value)) {
    throw ShapeError(cat("param gradient sink shape mismatch: value ",
                         value.shape_str()));
  }
  Var v = push(std::move(value), true);
  nodes_[static_cast<size_t>(v)].sink = sink;
  return v;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::matmul(Var a, Var b) {
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  Var out = push(mm(value(a), value(b)), wants_grad(a) || wants_grad(b));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, b, out](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      if (g.wants_grad(a)) mm_nt_into(g.gbuf(a), go, g.value(b), true);
      if (g.wants_grad(b)) mm_tn_into(g.gbuf(b), g.value(a), go, true);
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::matmul_nt(Var a, Var b) {
  check_rank2(a, "matmul_nt");
  check_rank2(b, "matmul_nt");
  Var out = push(mm_nt(value(a), value(b)), wants_grad(a) || wants_grad(b));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, b, out](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      if (g.wants_grad(a)) mm_into(g.gbuf(a), go, g.value(b), true);
      if (g.wants_grad(b)) mm_tn_into(g.gbuf(b), go, g.value(a), true);
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::add(Var a, Var b) {
  const Tensor<Real>& va = value(a);
  const Tensor<Real>& vb = value(b);
  const bool bcast = !va.same_shape(vb);
  if (bcast) {
    if (!(va.rank() == 2 && vb.rank() == 2 && vb.rows() == 1 &&
          vb.cols() == va.cols())) {
      throw ShapeError(cat("add: ", va.shape_str(), " vs ", vb.shape_str(),
                           " (only [1xC] row broadcast allowed)"));
    }
  }
  Tensor<Real> outv = va.clone();
  if (bcast) {
    const Real* brow = vb.row(0);
    for (int r = 0; r < outv.rows(); ++r) {
      Real* orow = outv.row(r);
      for (int c = 0; c < outv.cols(); ++c) orow[c] += brow[c];
    }
  } else {
    outv.add_in_place(vb);
  }
  Var out = push(std::move(outv), wants_grad(a) || wants_grad(b));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, b, out, bcast](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      if (g.wants_grad(a)) g.gbuf(a).add_in_place(go);
      if (g.wants_grad(b)) {
        Tensor<Real>& gb = g.gbuf(b);
        if (bcast) {
          Real* dst = gb.row(0);
          for (int r = 0; r < go.rows(); ++r) {
            const Real* src = go.row(r);
            for (int c = 0; c < go.cols(); ++c) dst[c] += src[c];
          }
        } else {
          gb.add_in_place(go);
        }
      }
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::mul(Var a, Var b) {
  const Tensor<Real>& va = value(a);
  const Tensor<Real>& vb = value(b);
  if (!va.same_shape(vb)) {
    throw ShapeError(cat("mul: ", va.shape_str(), " vs ", vb.shape_str()));
  }
  Tensor<Real> outv(va.shape());
  const size_t n = va.numel();
  for (size_t i = 0; i < n; ++i) outv.data()[i] = va.data()[i] * vb.data()[i];
  Var out = push(std::move(outv), wants_grad(a) || wants_grad(b));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, b, out](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      const size_t m = go.numel();
      if (g.wants_grad(a)) {
        Real* ga = g.gbuf(a).data();
        const Real* vb2 = g.value(b).data();
        for (size_t i = 0; i < m; ++i) ga[i] += go.data()[i] * vb2[i];
      }
      if (g.wants_grad(b)) {
        Real* gb = g.gbuf(b).data();
        const Real* va2 = g.value(a).data();
        for (size_t i = 0; i < m; ++i) gb[i] += go.data()[i] * va2[i];
      }
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::scale(Var a, Real s) {
  const Tensor<Real>& va = value(a);
  Tensor<Real> outv(va.shape());
  const size_t n = va.numel();
  for (size_t i = 0; i < n; ++i) outv.data()[i] = va.data()[i] * s;
  Var out = push(std::move(outv), wants_grad(a));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, out, s](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      Real* ga = g.gbuf(a).data();
      for (size_t i = 0; i < go.numel(); ++i) ga[i] += go.data()[i] * s;
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::relu(Var a) {
  const Tensor<Real>& va = value(a);
  Tensor<Real> outv(va.shape());
  const size_t n = va.numel();
  for (size_t i = 0; i < n; ++i) {
    const Real x = va.data()[i];
    outv.data()[i] = x > Real(0) ? x : Real(0);
  }
  Var out = push(std::move(outv), wants_grad(a));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, out](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      const Tensor<Real>& va2 = g.value(a);
      Real* ga = g.gbuf(a).data();
      for (size_t i = 0; i < go.numel(); ++i) {
        if (va2.data()[i] > Real(0)) ga[i] += go.data()[i];
      }
    };
  }
  return out;
}

namespace {

// Shared softmax backward: gx += y * (gy - sum(gy*y)) per row. Forbidden
// entries carry y == 0 exactly, so they contribute nothing.
template <typename Real>
void softmax_backward_rows(Tensor<Real>& gx, const Tensor<Real>& y,
                           const Tensor<Real>& gy) {
  for (int r = 0; r < y.rows(); ++r) {
    const Real* yr = y.row(r);
    const Real* gr = gy.row(r);
    Real* out = gx.row(r);
    Real dot = Real(0);
    for (int c = 0; c < y.cols(); ++c) dot += yr[c] * gr[c];
    for (int c = 0; c < y.cols(); ++c) out[c] += yr[c] * (gr[c] - dot);
  }
}

}  // namespace

template <typename Real>
typename Graph<Real>::Var Graph<Real>::softmax_rows(Var a) {
  check_rank2(a, "softmax_rows");
  const Tensor<Real>& va = value(a);
  Tensor<Real> outv(va.shape());
  for (int r = 0; r < va.rows(); ++r) {
    const Real* x = va.row(r);
    Real* y = outv.row(r);
    Real mx = x[0];
    for (int c = 1; c < va.cols(); ++c) mx = std::max(mx, x[c]);
    Real sum = Real(0);
    for (int c = 0; c < va.cols(); ++c) {
      y[c] = std::exp(x[c] - mx);
      sum += y[c];
    }
    for (int c = 0; c < va.cols(); ++c) y[c] /= sum;
  }
  Var out = push(std::move(outv), wants_grad(a));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, out](Graph& g) {
      softmax_backward_rows(g.gbuf(a), g.value(out), g.gref(out));
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::attn_softmax(Var scores,
                                                    std::vector<uint8_t> key_mask,
                                                    bool causal) {
  check_rank2(scores, "attn_softmax");
  const Tensor<Real>& va = value(scores);
  const int tq = va.rows(), tk = va.cols();
  if (!key_mask.empty() && static_cast<int>(key_mask.size()) != tk) {
    throw ShapeError(cat("attn_softmax: key mask size ", key_mask.size(),
                         " for ", tk, " keys"));
  }
  Tensor<Real> outv({tq, tk});
  for (int i = 0; i < tq; ++i) {
    const Real* x = va.row(i);
    Real* y = outv.row(i);
    const int last = causal ? std::min(i, tk - 1) : tk - 1;
    Real mx = Real(0);
    bool any = false;
    for (int j = 0; j <= last; ++j) {
      if (!key_mask.empty() && !key_mask[static_cast<size_t>(j)]) continue;
      mx = any ? std::max(mx, x[j]) : x[j];
      any = true;
    }
    if (!any) throw Error(cat("attn_softmax: query ", i, " has no permitted key"));
    Real sum = Real(0);
    for (int j = 0; j <= last; ++j) {
      if (!key_mask.empty() && !key_mask[static_cast<size_t>(j)]) continue;
      y[j] = std::exp(x[j] - mx);
      sum += y[j];
    }
    for (int j = 0; j <= last; ++j) {
      if (!key_mask.empty() && !key_mask[static_cast<size_t>(j)]) continue;
      y[j] /= sum;
    }
  }
  Var out = push(std::move(outv), wants_grad(scores));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [scores, out](Graph& g) {
      softmax_backward_rows(g.gbuf(scores), g.value(out), g.gref(out));
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::layer_norm(Var a, Var gain, Var bias, Real eps) {
  check_rank2(a, "layer_norm");
  const Tensor<Real>& va = value(a);
  const Tensor<Real>& vg = value(gain);
  const Tensor<Real>& vb = value(bias);
  const int rows = va.rows(), cols = va.cols();
  if (vg.rank() != 2 || vg.rows() != 1 || vg.cols() != cols ||
      !vg.same_shape(vb)) {
    throw ShapeError(cat("layer_norm: x ", va.shape_str(), " gain ",
                         vg.shape_str(), " bias ", vb.shape_str()));
  }
  Tensor<Real> outv({rows, cols});
  Tensor<Real> xhat({rows, cols});
  Tensor<Real> inv_std({rows, 1});
  for (int r = 0; r < rows; ++r) {
    const Real* x = va.row(r);
    Real mean = Real(0);
    for (int c = 0; c < cols; ++c) mean += x[c];
    mean /= Real(cols);
    Real var = Real(0);
    for (int c = 0; c < cols; ++c) {
      const Real d = x[c] - mean;
      var += d * d;
    }
    var /= Real(cols);
    const Real inv = Real(1) / std::sqrt(var + eps);
    inv_std.at(r, 0) = inv;
    Real* xh = xhat.row(r);
    Real* y = outv.row(r);
    const Real* gn = vg.row(0);
    const Real* bs = vb.row(0);
    for (int c = 0; c < cols; ++c) {
      xh[c] = (x[c] - mean) * inv;
      y[c] = xh[c] * gn[c] + bs[c];
    }
  }
  Var out = push(std::move(outv),
                 wants_grad(a) || wants_grad(gain) || wants_grad(bias));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward =
        [a, gain, bias, out, xhat, inv_std](Graph& g) {
          const Tensor<Real>& go = g.gref(out);
          const Tensor<Real>& vg2 = g.value(gain);
          const int rows2 = go.rows(), cols2 = go.cols();
          if (g.wants_grad(gain)) {
            Real* dg = g.gbuf(gain).row(0);
            for (int r = 0; r < rows2; ++r) {
              const Real* gr = go.row(r);
              const Real* xh = xhat.row(r);
              for (int c = 0; c < cols2; ++c) dg[c] += gr[c] * xh[c];
            }
          }
          if (g.wants_grad(bias)) {
            Real* db = g.gbuf(bias).row(0);
            for (int r = 0; r < rows2; ++r) {
              const Real* gr = go.row(r);
              for (int c = 0; c < cols2; ++c) db[c] += gr[c];
            }
          }
          if (g.wants_grad(a)) {
            Tensor<Real>& gx = g.gbuf(a);
            const Real* gn = vg2.row(0);
            for (int r = 0; r < rows2; ++r) {
              const Real* gr = go.row(r);
              const Real* xh = xhat.row(r);
              const Real inv = inv_std.at(r, 0);
              Real mean_gg = Real(0), mean_ggx = Real(0);
              for (int c = 0; c < cols2; ++c) {
                const Real gg = gr[c] * gn[c];
                mean_gg += gg;
                mean_ggx += gg * xh[c];
              }
              mean_gg /= Real(cols2);
              mean_ggx /= Real(cols2);
              Real* gx_r = gx.row(r);
              for (int c = 0; c < cols2; ++c) {
                const Real gg = gr[c] * gn[c];
                gx_r[c] += (gg - mean_gg - xh[c] * mean_ggx) * inv;
              }
            }
          }
        };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::embedding(Var table, std::vector<int> ids) {
  check_rank2(table, "embedding");
  const Tensor<Real>& vt = value(table);
  const int n = static_cast<int>(ids.size());
  const int d = vt.cols();
  for (int id : ids) {
    if (id < 0 || id >= vt.rows()) {
      throw ShapeError(cat("embedding: id ", id, " outside table ", vt.shape_str()));
    }
  }
  Tensor<Real> outv({n, d});
  for (int t = 0; t < n; ++t) {
    std::memcpy(outv.row(t), vt.row(ids[static_cast<size_t>(t)]),
                static_cast<size_t>(d) * sizeof(Real));
  }
  Var out = push(std::move(outv), wants_grad(table));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward =
        [table, out, ids = std::move(ids)](Graph& g) {
          const Tensor<Real>& go = g.gref(out);
          Tensor<Real>& gt = g.gbuf(table);
          for (int t = 0; t < go.rows(); ++t) {
            const Real* src = go.row(t);
            Real* dst = gt.row(ids[static_cast<size_t>(t)]);
            for (int c = 0; c < go.cols(); ++c) dst[c] += src[c];
          }
        };
  }
  return out;
}

namespace {
// 'same' top padding for a strided dim: output covers ceil(in/stride).
int same_pad_lo(int in, int kernel, int stride) {
  const int out = (in + stride - 1) / stride;
  const int total = std::max((out - 1) * stride + kernel - in, 0);
  return total / 2;
}
}  // namespace

template <typename Real>
typename Graph<Real>::Var Graph<Real>::conv2d(Var x, Var w, Var b, int stride_t) {
  check_rank2(x, "conv2d");
  const Tensor<Real>& vx = value(x);
  const Tensor<Real>& vw = value(w);
  const Tensor<Real>& vb = value(b);
  if (vw.rank() != 3) throw ShapeError(cat("conv2d: weight ", vw.shape_str()));
  const int t_in = vx.rows(), f_in = vx.cols();
  const int chans = vw.dim(0), kh = vw.dim(1), kw = vw.dim(2);
  if (vb.rank() != 2 || vb.rows() != 1 || vb.cols() != chans) {
    throw ShapeError(cat("conv2d: bias ", vb.shape_str(), " for ", chans, " channels"));
  }
  if (stride_t < 1) throw ShapeError("conv2d: stride must be >= 1");
  const int t_out = (t_in + stride_t - 1) / stride_t;
  const int pad_t = same_pad_lo(t_in, kh, stride_t);
  const int pad_f = same_pad_lo(f_in, kw, 1);
  const Real* wd = vw.data();
  auto wat = [&](int c, int i, int j) -> Real {
    return wd[(static_cast<size_t>(c) * kh + i) * static_cast<size_t>(kw) + j];
  };
  Tensor<Real> outv({t_out, f_in * chans});
  for (int ot = 0; ot < t_out; ++ot) {
    Real* orow = outv.row(ot);
    for (int f = 0; f < f_in; ++f) {
      for (int c = 0; c < chans; ++c) {
        Real acc = vb.at(0, c);
        for (int i = 0; i < kh; ++i) {
          const int it = ot * stride_t - pad_t + i;
          if (it < 0 || it >= t_in) continue;
          const Real* xrow = vx.row(it);
          for (int j = 0; j < kw; ++j) {
            const int jf = f - pad_f + j;
            if (jf < 0 || jf >= f_in) continue;
            acc += xrow[jf] * wat(c, i, j);
          }
        }
        orow[f * chans + c] = acc;
      }
    }
  }
  Var out = push(std::move(outv), wants_grad(x) || wants_grad(w) || wants_grad(b));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [x, w, b, out, stride_t, pad_t,
                                                 pad_f](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      const Tensor<Real>& vx2 = g.value(x);
      const Tensor<Real>& vw2 = g.value(w);
      const int t_in2 = vx2.rows(), f_in2 = vx2.cols();
      const int chans2 = vw2.dim(0), kh2 = vw2.dim(1), kw2 = vw2.dim(2);
      const bool wx = g.wants_grad(x), ww = g.wants_grad(w), wb = g.wants_grad(b);
      Tensor<Real>* gx = wx ? &g.gbuf(x) : nullptr;
      Tensor<Real>* gw = ww ? &g.gbuf(w) : nullptr;
      Tensor<Real>* gb = wb ? &g.gbuf(b) : nullptr;
      auto wat2 = [&](int c, int i, int j) -> Real {
        return vw2.data()[(static_cast<size_t>(c) * kh2 + i) * static_cast<size_t>(kw2) + j];
      };
      for (int ot = 0; ot < go.rows(); ++ot) {
        const Real* grow = go.row(ot);
        for (int f = 0; f < f_in2; ++f) {
          for (int c = 0; c < chans2; ++c) {
            const Real gv = grow[f * chans2 + c];
            if (gv == Real(0)) continue;
            if (wb) gb->at(0, c) += gv;
            for (int i = 0; i < kh2; ++i) {
              const int it = ot * stride_t - pad_t + i;
              if (it < 0 || it >= t_in2) continue;
              for (int j = 0; j < kw2; ++j) {
                const int jf = f - pad_f + j;
                if (jf < 0 || jf >= f_in2) continue;
                if (wx) gx->at(it, jf) += gv * wat2(c, i, j);
                if (ww) {
                  gw->data()[(static_cast<size_t>(c) * kh2 + i) *
                                 static_cast<size_t>(kw2) + j] +=
                      gv * vx2.at(it, jf);
                }
              }
            }
          }
        }
      }
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::conv1d_causal(Var x, Var w, Var b) {
  check_rank2(x, "conv1d_causal");
  const Tensor<Real>& vx = value(x);
  const Tensor<Real>& vw = value(w);
  const Tensor<Real>& vb = value(b);
  if (vw.rank() != 3) throw ShapeError(cat("conv1d_causal: weight ", vw.shape_str()));
  const int t_in = vx.rows(), d_in = vx.cols();
  const int d_out = vw.dim(0), d_in_w = vw.dim(1), k = vw.dim(2);
  if (d_in_w != d_in) {
    throw ShapeError(cat("conv1d_causal: x ", vx.shape_str(), " weight ", vw.shape_str()));
  }
  if (vb.rank() != 2 || vb.rows() != 1 || vb.cols() != d_out) {
    throw ShapeError(cat("conv1d_causal: bias ", vb.shape_str()));
  }
  const Real* wd = vw.data();
  auto wat = [&](int o, int i, int tap) -> Real {
    return wd[(static_cast<size_t>(o) * d_in + i) * static_cast<size_t>(k) + tap];
  };
  Tensor<Real> outv({t_in, d_out});
  for (int t = 0; t < t_in; ++t) {
    Real* orow = outv.row(t);
    for (int o = 0; o < d_out; ++o) orow[o] = vb.at(0, o);
    for (int tap = 0; tap < k; ++tap) {
      const int it = t - (k - 1) + tap;
      if (it < 0) continue;
      const Real* xrow = vx.row(it);
      for (int o = 0; o < d_out; ++o) {
        Real acc = Real(0);
        for (int i = 0; i < d_in; ++i) acc += xrow[i] * wat(o, i, tap);
        orow[o] += acc;
      }
    }
  }
  Var out = push(std::move(outv), wants_grad(x) || wants_grad(w) || wants_grad(b));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [x, w, b, out](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      const Tensor<Real>& vx2 = g.value(x);
      const Tensor<Real>& vw2 = g.value(w);
      const int d_in2 = vx2.cols();
      const int d_out2 = vw2.dim(0), k2 = vw2.dim(2);
      const bool wx = g.wants_grad(x), ww = g.wants_grad(w), wb = g.wants_grad(b);
      Tensor<Real>* gx = wx ? &g.gbuf(x) : nullptr;
      Tensor<Real>* gw = ww ? &g.gbuf(w) : nullptr;
      Tensor<Real>* gb = wb ? &g.gbuf(b) : nullptr;
      for (int t = 0; t < go.rows(); ++t) {
        const Real* grow = go.row(t);
        if (wb) {
          Real* db = gb->row(0);
          for (int o = 0; o < d_out2; ++o) db[o] += grow[o];
        }
        for (int tap = 0; tap < k2; ++tap) {
          const int it = t - (k2 - 1) + tap;
          if (it < 0) continue;
          const Real* xrow = vx2.row(it);
          Real* gxrow = wx ? gx->row(it) : nullptr;
          for (int o = 0; o < d_out2; ++o) {
            const Real gv = grow[o];
            if (gv == Real(0)) continue;
            for (int i = 0; i < d_in2; ++i) {
              const size_t widx =
                  (static_cast<size_t>(o) * d_in2 + i) * static_cast<size_t>(k2) + tap;
              if (wx) gxrow[i] += gv * vw2.data()[widx];
              if (ww) gw->data()[widx] += gv * xrow[i];
            }
          }
        }
      }
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::dropout(Var a, double rate) {
  if (rate < 0.0 || rate >= 1.0) throw Error(cat("dropout: rate ", rate));
  if (mode_ == Mode::eval || rate == 0.0) return a;
  if (dropout_rng_ == nullptr) {
    throw Error("dropout in train mode needs an RNG stream");
  }
  const Tensor<Real>& va = value(a);
  const Real keep_scale = Real(1.0 / (1.0 - rate));
  Tensor<Real> mask(va.shape());
  Tensor<Real> outv(va.shape());
  const size_t n = va.numel();
  for (size_t i = 0; i < n; ++i) {
    const Real m = dropout_rng_->uniform() < rate ? Real(0) : keep_scale;
    mask.data()[i] = m;
    outv.data()[i] = va.data()[i] * m;
  }
  Var out = push(std::move(outv), wants_grad(a));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, out, mask](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      Real* ga = g.gbuf(a).data();
      for (size_t i = 0; i < go.numel(); ++i) ga[i] += go.data()[i] * mask.data()[i];
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::concat_cols(Var a, Var b) {
  check_rank2(a, "concat_cols");
  check_rank2(b, "concat_cols");
  const Tensor<Real>& va = value(a);
  const Tensor<Real>& vb = value(b);
  if (va.rows() != vb.rows()) {
    throw ShapeError(cat("concat_cols: ", va.shape_str(), " vs ", vb.shape_str()));
  }
  const int rows = va.rows(), ca = va.cols(), cb = vb.cols();
  Tensor<Real> outv({rows, ca + cb});
  for (int r = 0; r < rows; ++r) {
    std::memcpy(outv.row(r), va.row(r), static_cast<size_t>(ca) * sizeof(Real));
    std::memcpy(outv.row(r) + ca, vb.row(r), static_cast<size_t>(cb) * sizeof(Real));
  }
  Var out = push(std::move(outv), wants_grad(a) || wants_grad(b));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, b, out, ca, cb](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      if (g.wants_grad(a)) {
        Tensor<Real>& ga = g.gbuf(a);
        for (int r = 0; r < go.rows(); ++r) {
          const Real* src = go.row(r);
          Real* dst = ga.row(r);
          for (int c = 0; c < ca; ++c) dst[c] += src[c];
        }
      }
      if (g.wants_grad(b)) {
        Tensor<Real>& gb = g.gbuf(b);
        for (int r = 0; r < go.rows(); ++r) {
          const Real* src = go.row(r) + ca;
          Real* dst = gb.row(r);
          for (int c = 0; c < cb; ++c) dst[c] += src[c];
        }
      }
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::slice_cols(Var a, int begin, int end) {
  check_rank2(a, "slice_cols");
  const Tensor<Real>& va = value(a);
  if (begin < 0 || end > va.cols() || begin >= end) {
    throw ShapeError(cat("slice_cols: [", begin, ",", end, ") of ", va.shape_str()));
  }
  const int rows = va.rows(), w = end - begin;
  Tensor<Real> outv({rows, w});
  for (int r = 0; r < rows; ++r) {
    std::memcpy(outv.row(r), va.row(r) + begin, static_cast<size_t>(w) * sizeof(Real));
  }
  Var out = push(std::move(outv), wants_grad(a));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, out, begin, w](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      Tensor<Real>& ga = g.gbuf(a);
      for (int r = 0; r < go.rows(); ++r) {
        const Real* src = go.row(r);
        Real* dst = ga.row(r) + begin;
        for (int c = 0; c < w; ++c) dst[c] += src[c];
      }
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::reshape(Var a, std::vector<int> shape) {
  const Tensor<Real>& va = value(a);
  Var out = push(va.reshaped(std::move(shape)), wants_grad(a));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, out](Graph& g) {
      g.gbuf(a).add_in_place(g.gref(out).reshaped(g.value(a).shape()));
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::grad_gate(Var a, bool open) {
  // Forward shares the input buffer. A closed gate drops needs_grad, so no
  // consumer records a gradient path into it and everything upstream of the
  // gate receives exactly zero gradient.
  Var out = push(value(a), wants_grad(a) && open);
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [a, out](Graph& g) {
      g.gbuf(a).add_in_place(g.gref(out));
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::Var Graph<Real>::relative_bias(Var rel_scores, int keys, int clip) {
  check_rank2(rel_scores, "relative_bias");
  const Tensor<Real>& vr = value(rel_scores);
  if (clip < 0 || vr.cols() != 2 * clip + 1) {
    throw ShapeError(cat("relative_bias: scores ", vr.shape_str(), " for clip ", clip));
  }
  if (keys < 1) throw ShapeError("relative_bias: keys < 1");
  const int tq = vr.rows();
  Tensor<Real> outv({tq, keys});
  auto bucket = [clip](int i, int j) {
    int d = j - i;
    if (d < -clip) d = -clip;
    if (d > clip) d = clip;
    return d + clip;
  };
  for (int i = 0; i < tq; ++i) {
    const Real* src = vr.row(i);
    Real* dst = outv.row(i);
    for (int j = 0; j < keys; ++j) dst[j] = src[bucket(i, j)];
  }
  Var out = push(std::move(outv), wants_grad(rel_scores));
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward = [rel_scores, out, clip](Graph& g) {
      const Tensor<Real>& go = g.gref(out);
      Tensor<Real>& gr = g.gbuf(rel_scores);
      for (int i = 0; i < go.rows(); ++i) {
        const Real* src = go.row(i);
        Real* dst = gr.row(i);
        for (int j = 0; j < go.cols(); ++j) {
          int d = j - i;
          if (d < -clip) d = -clip;
          if (d > clip) d = clip;
          dst[d + clip] += src[j];
        }
      }
    };
  }
  return out;
}

template <typename Real>
typename Graph<Real>::CeResult Graph<Real>::smoothed_cross_entropy(
    Var logits, const std::vector<int>& targets, double smoothing,
    const std::vector<uint8_t>& exclude) {
  check_rank2(logits, "smoothed_cross_entropy");
  const Tensor<Real>& vl = value(logits);
  const int t_len = vl.rows(), vocab = vl.cols();
  if (static_cast<int>(targets.size()) != t_len) {
    throw ShapeError(cat("smoothed_cross_entropy: ", targets.size(),
                         " targets for ", t_len, " logit rows"));
  }
  if (!exclude.empty() && static_cast<int>(exclude.size()) != t_len) {
    throw ShapeError(cat("smoothed_cross_entropy: exclude size ", exclude.size()));
  }
  if (smoothing < 0.0 || smoothing >= 1.0) {
    throw Error(cat("smoothed_cross_entropy: smoothing ", smoothing));
  }

  std::vector<int> included;
  included.reserve(static_cast<size_t>(t_len));
  for (int t = 0; t < t_len; ++t) {
    if (exclude.empty() || !exclude[static_cast<size_t>(t)]) included.push_back(t);
  }
  CeResult res;
  res.counted = static_cast<int>(included.size());
  if (included.empty()) {
    res.loss = input(Tensor<Real>::scalar(Real(0)));
    res.all_excluded = true;
    return res;
  }
  for (int t : included) {
    const int y = targets[static_cast<size_t>(t)];
    if (y < 0 || y >= vocab) {
      throw ShapeError(cat("smoothed_cross_entropy: target ", y, " at position ",
                           t, " outside vocab ", vocab));
    }
  }

  const Real s = static_cast<Real>(smoothing);
  const Real q_off = s / Real(vocab);
  const Real q_on = Real(1) - s + q_off;
  // KL(q || p) = sum q log q - sum q log p; the first term is constant in the
  // logits and identical for every position.
  Real neg_entropy = Real(0);
  if (smoothing > 0.0) {
    neg_entropy = q_on * std::log(q_on) + Real(vocab - 1) * q_off * std::log(q_off);
  }

  // Softmax rows are kept for the backward pass; excluded rows stay zero and
  // are never read.
  Tensor<Real> probs({t_len, vocab});
  Real total = Real(0);
  for (int t : included) {
    const Real* x = vl.row(t);
    Real* p = probs.row(t);
    Real mx = x[0];
    for (int v = 1; v < vocab; ++v) mx = std::max(mx, x[v]);
    Real sum = Real(0);
    for (int v = 0; v < vocab; ++v) {
      p[v] = std::exp(x[v] - mx);
      sum += p[v];
    }
    const Real lse = mx + std::log(sum);
    Real qx = Real(0);
    if (smoothing > 0.0) {
      Real xsum = Real(0);
      for (int v = 0; v < vocab; ++v) xsum += x[v];
      qx = q_off * xsum + (Real(1) - s) * x[targets[static_cast<size_t>(t)]];
    } else {
      qx = x[targets[static_cast<size_t>(t)]];
    }
    for (int v = 0; v < vocab; ++v) p[v] /= sum;
    total += lse - qx + neg_entropy;
  }
  const Real inv_count = Real(1) / Real(res.counted);
  Var out = push(Tensor<Real>::scalar(total * inv_count), wants_grad(logits));
  res.loss = out;
  if (wants_grad(out)) {
    nodes_[static_cast<size_t>(out)].backward =
        [logits, out, probs, included, targets, q_on, q_off, inv_count,
         smoothing](Graph& g) {
          const Real seed = g.gref(out).item() * inv_count;
          Tensor<Real>& gl = g.gbuf(logits);
          const int vocab2 = gl.cols();
          for (int t : included) {
            const Real* p = probs.row(t);
            Real* dst = gl.row(t);
            const int y = targets[static_cast<size_t>(t)];
            if (smoothing > 0.0) {
              for (int v = 0; v < vocab2; ++v) {
                dst[v] += seed * (p[v] - (v == y ? q_on : q_off));
              }
            } else {
              for (int v = 0; v < vocab2; ++v) {
                dst[v] += seed * (p[v] - (v == y ? Real(1) : Real(0)));
              }
            }
          }
        };
  }
  return res;
}

template <typename Real>
Tensor<Real> Graph<Real>::grad_of(Var v) const {
  const Node& n = nodes_[static_cast<size_t>(v)];
  if (!n.grad.allocated()) return Tensor<Real>(n.value.shape());
  return n.grad.clone();
}

template <typename Real>
void Graph<Real>::backward(Var loss, Real seed) {
  if (mode_ != Mode::train) throw Error("backward() on an eval graph");
  if (swept_) throw Error("backward() called twice");
  swept_ = true;
  if (value(loss).numel() != 1) {
    throw ShapeError(cat("backward: loss must be scalar, got ",
                         value(loss).shape_str()));
  }
  gbuf(loss).data()[0] = seed;
  for (size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.grad.allocated()) continue;  // no gradient ever reached this node
    if (n.backward) n.backward(*this);
    if (n.sink) n.sink->add_in_place(n.grad);
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace cjt::numerics
