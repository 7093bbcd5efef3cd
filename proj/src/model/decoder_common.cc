// model/decoder_common.cc

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

#include "model/decoder_common.h"

#include <algorithm>
#include <cmath>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::model {

using cjt::numerics::Tensor;
using cjt::util::cat;
using cjt::Error;

void register_decoder_params(ParamStore& store, const DecoderLayout& L) {
  const std::string& P = L.prefix;
  const int d = L.attn_dim;
  store.add(P + "emb", {L.vocab, d}, InitSpec::uniform(std::sqrt(1.0 / d)));
  for (int b = 0; b < L.conv_blocks; ++b) {
    const std::string base = cat(P, "conv", b, ".");
    store.add(base + "w", {d, d, L.conv_kernel},
              InitSpec::uniform(std::sqrt(1.0 / (d * L.conv_kernel))));
    store.add(base + "b", {1, d}, InitSpec::zeros());
  }
  for (int i = 0; i < L.layers; ++i) {
    const std::string base = cat(P, "l", i, ".");
    reg_layer_norm(store, base + "ln1.", d);
    reg_attention(store, base + "self.", d, L.heads, L.rel_clip);
    if (L.has_cross) {
      reg_layer_norm(store, base + "ln2.", d);
      reg_attention(store, base + "cross.", d, L.heads, /*rel_clip=*/-1);
    }
    reg_layer_norm(store, base + "ln3.", d);
    reg_ffn(store, base + "ffn.", d, L.ffn_dim);
  }
  reg_layer_norm(store, P + "lnf.", d);
  // Zero output projection: an untrained stack scores every token equally.
  store.add(P + "out.w", {d, L.vocab}, InitSpec::zeros());
  store.add(P + "out.b", {1, L.vocab}, InitSpec::zeros());
}

GraphF::Var build_decoder_graph(GraphF& g, ParamBinder& p,
                                const DecoderLayout& L,
                                const std::vector<int>& history,
                                const GraphF::Var* memory,
                                const std::vector<uint8_t>* memory_mask) {
  if (history.empty()) throw Error("decoder graph: empty history");
  if ((memory != nullptr) != L.has_cross) {
    throw Error("decoder graph: memory does not match layout");
  }
  const std::string& P = L.prefix;
  const std::vector<uint8_t> no_mask;

  GraphF::Var x = g.embedding(p(P + "emb"), history);
  for (int b = 0; b < L.conv_blocks; ++b) {
    const std::string base = cat(P, "conv", b, ".");
    GraphF::Var conv = g.relu(g.conv1d_causal(x, p(base + "w"), p(base + "b")));
    x = g.add(x, g.dropout(conv, L.dropout));
  }
  for (int i = 0; i < L.layers; ++i) {
    const std::string base = cat(P, "l", i, ".");
    GraphF::Var z = layer_norm_block(g, p, base + "ln1.", x);
    GraphF::Var self = attention_block(g, p, base + "self.", z, z, no_mask,
                                       /*causal=*/true, L.heads, L.rel_clip);
    x = g.add(x, g.dropout(self, L.dropout));
    if (L.has_cross) {
      z = layer_norm_block(g, p, base + "ln2.", x);
      GraphF::Var cross =
          attention_block(g, p, base + "cross.", z, *memory,
                          memory_mask ? *memory_mask : no_mask,
                          /*causal=*/false, L.heads, /*rel_clip=*/-1);
      x = g.add(x, g.dropout(cross, L.dropout));
    }
    z = layer_norm_block(g, p, base + "ln3.", x);
    x = g.add(x, g.dropout(ffn_block(g, p, base + "ffn.", z), L.dropout));
  }
  x = layer_norm_block(g, p, P + "lnf.", x);
  return g.add(g.matmul(x, p(P + "out.w")), p(P + "out.b"));
}

// --- Incremental stepper ---------------------------------------------------

namespace {

// y = x . W for a single row, matching the k-inner accumulation order of the
// graph matmul so the two paths agree to round-off.
void vecmat(const float* x, const Tensor<float>& w, float* y) {
  const int rows = w.rows(), cols = w.cols();
  std::fill(y, y + cols, 0.0f);
  for (int k = 0; k < rows; ++k) {
    const float xv = x[k];
    if (xv == 0.0f) continue;
    const float* wrow = w.row(k);
    for (int j = 0; j < cols; ++j) y[j] += xv * wrow[j];
  }
}

// Mirrors the graph layer_norm forward (population variance, eps 1e-5).
void ln_row(const float* x, int d, const Tensor<float>& gain,
            const Tensor<float>& bias, float* y) {
  float mean = 0.0f;
  for (int c = 0; c < d; ++c) mean += x[c];
  mean /= static_cast<float>(d);
  float var = 0.0f;
  for (int c = 0; c < d; ++c) {
    const float dv = x[c] - mean;
    var += dv * dv;
  }
  var /= static_cast<float>(d);
  const float inv = 1.0f / std::sqrt(var + 1e-5f);
  const float* gn = gain.row(0);
  const float* bs = bias.row(0);
  for (int c = 0; c < d; ++c) y[c] = (x[c] - mean) * inv * gn[c] + bs[c];
}

// Softmax over the permitted subset; forbidden entries come out exactly 0.
void masked_softmax(float* s, int n, const std::vector<uint8_t>& mask) {
  float mx = 0.0f;
  bool any = false;
  for (int j = 0; j < n; ++j) {
    if (!mask.empty() && !mask[static_cast<size_t>(j)]) continue;
    mx = any ? std::max(mx, s[j]) : s[j];
    any = true;
  }
  if (!any) throw Error("decoder step: attention has no permitted key");
  float sum = 0.0f;
  for (int j = 0; j < n; ++j) {
    if (!mask.empty() && !mask[static_cast<size_t>(j)]) {
      s[j] = 0.0f;
      continue;
    }
    s[j] = std::exp(s[j] - mx);
    sum += s[j];
  }
  for (int j = 0; j < n; ++j) {
    if (!mask.empty() && !mask[static_cast<size_t>(j)]) continue;
    s[j] /= sum;
  }
}

}  // namespace

struct DecoderStepper::Impl {
  struct LayerW {
    const Tensor<float>*ln1_g, *ln1_b;
    const Tensor<float>*self_wq, *self_wk, *self_wv, *self_wo, *self_rel;
    const Tensor<float>*ln2_g = nullptr, *ln2_b = nullptr;
    const Tensor<float>*cross_wq = nullptr, *cross_wk = nullptr,
        *cross_wv = nullptr, *cross_wo = nullptr;
    const Tensor<float>*ln3_g, *ln3_b;
    const Tensor<float>*ffn_w1, *ffn_b1, *ffn_w2, *ffn_b2;
  };
  struct ConvW {
    const Tensor<float>*w, *b;
  };

  DecoderLayout layout;
  const Tensor<float>* emb = nullptr;
  std::vector<ConvW> convs;
  std::vector<LayerW> layers;
  const Tensor<float>*lnf_g, *lnf_b, *out_w, *out_b;
};

DecoderStepper::DecoderStepper(const ParamStore& store, DecoderLayout layout)
    : impl_(std::make_unique<Impl>()) {
  impl_->layout = std::move(layout);
  const DecoderLayout& L = impl_->layout;
  const std::string& P = L.prefix;
  auto W = [&store](const std::string& name) -> const Tensor<float>* {
    return &store.value(name);
  };
  impl_->emb = W(P + "emb");
  for (int b = 0; b < L.conv_blocks; ++b) {
    const std::string base = cat(P, "conv", b, ".");
    impl_->convs.push_back({W(base + "w"), W(base + "b")});
  }
  for (int i = 0; i < L.layers; ++i) {
    const std::string base = cat(P, "l", i, ".");
    Impl::LayerW lw{};
    lw.ln1_g = W(base + "ln1.g");
    lw.ln1_b = W(base + "ln1.b");
    lw.self_wq = W(base + "self.wq");
    lw.self_wk = W(base + "self.wk");
    lw.self_wv = W(base + "self.wv");
    lw.self_wo = W(base + "self.wo");
    lw.self_rel = W(base + "self.rel");
    if (L.has_cross) {
      lw.ln2_g = W(base + "ln2.g");
      lw.ln2_b = W(base + "ln2.b");
      lw.cross_wq = W(base + "cross.wq");
      lw.cross_wk = W(base + "cross.wk");
      lw.cross_wv = W(base + "cross.wv");
      lw.cross_wo = W(base + "cross.wo");
    }
    lw.ln3_g = W(base + "ln3.g");
    lw.ln3_b = W(base + "ln3.b");
    lw.ffn_w1 = W(base + "ffn.w1");
    lw.ffn_b1 = W(base + "ffn.b1");
    lw.ffn_w2 = W(base + "ffn.w2");
    lw.ffn_b2 = W(base + "ffn.b2");
    impl_->layers.push_back(lw);
  }
  impl_->lnf_g = W(P + "lnf.g");
  impl_->lnf_b = W(P + "lnf.b");
  impl_->out_w = W(P + "out.w");
  impl_->out_b = W(P + "out.b");
}

DecoderStepper::~DecoderStepper() = default;
DecoderStepper::DecoderStepper(DecoderStepper&&) noexcept = default;
DecoderStepper& DecoderStepper::operator=(DecoderStepper&&) noexcept = default;

const DecoderLayout& DecoderStepper::layout() const { return impl_->layout; }

CrossCache DecoderStepper::make_cross_cache(const Tensor<float>& memory,
                                            std::vector<uint8_t> mask) const {
  const DecoderLayout& L = impl_->layout;
  if (!L.has_cross) throw Error("cross cache for a decoder without cross-attention");
  if (memory.rank() != 2 || memory.cols() != L.attn_dim) {
    throw Error(cat("cross cache: memory ", memory.shape_str()));
  }
  if (!mask.empty() && static_cast<int>(mask.size()) != memory.rows()) {
    throw Error(cat("cross cache: mask size ", mask.size(), " for ",
                    memory.rows(), " frames"));
  }
  CrossCache cc;
  cc.memory = memory;
  cc.mask = std::move(mask);
  cc.k.reserve(impl_->layers.size());
  cc.v.reserve(impl_->layers.size());
  for (const Impl::LayerW& lw : impl_->layers) {
    cc.k.push_back(numerics::mm(memory, *lw.cross_wk));
    cc.v.push_back(numerics::mm(memory, *lw.cross_wv));
  }
  return cc;
}

DecoderState DecoderStepper::initial_state() const {
  DecoderState st;
  st.self_k.resize(static_cast<size_t>(impl_->layout.layers));
  st.self_v.resize(static_cast<size_t>(impl_->layout.layers));
  st.conv_in.resize(static_cast<size_t>(impl_->layout.conv_blocks));
  return st;
}

std::vector<float> DecoderStepper::step(DecoderState& state, int token,
                                        const CrossCache* cross) const {
  const DecoderLayout& L = impl_->layout;
  const int d = L.attn_dim, heads = L.heads, dk = d / heads;
  const float inv_sqrt_dk = 1.0f / std::sqrt(static_cast<float>(dk));
  if ((cross != nullptr) != L.has_cross) {
    throw Error("decoder step: cross cache does not match layout");
  }
  if (token < 0 || token >= L.vocab) {
    throw Error(cat("decoder step: token ", token, " outside vocabulary"));
  }
  if (static_cast<int>(state.self_k.size()) != L.layers ||
      static_cast<int>(state.conv_in.size()) != L.conv_blocks) {
    throw Error("decoder step: state does not match layout");
  }
  const int t = state.length;  // 0-based position of this token

  // Embedding row.
  std::vector<float> x(impl_->emb->row(token), impl_->emb->row(token) + d);

  // Causal conv front-end, residual per block.
  for (size_t b = 0; b < impl_->convs.size(); ++b) {
    std::vector<float>& hist = state.conv_in[b];
    hist.insert(hist.end(), x.begin(), x.end());
    const Tensor<float>& cw = *impl_->convs[b].w;
    const float* wd = cw.data();
    const int kk = cw.dim(2);
    std::vector<float> y(static_cast<size_t>(d));
    for (int o = 0; o < d; ++o) y[static_cast<size_t>(o)] = impl_->convs[b].b->at(0, o);
    for (int tap = 0; tap < kk; ++tap) {
      const int it = t - (kk - 1) + tap;
      if (it < 0) continue;
      const float* xrow = hist.data() + static_cast<size_t>(it) * d;
      for (int o = 0; o < d; ++o) {
        float acc = 0.0f;
        const size_t wbase = static_cast<size_t>(o) * d * kk + static_cast<size_t>(tap);
        for (int i = 0; i < d; ++i) acc += xrow[i] * wd[wbase + static_cast<size_t>(i) * kk];
        y[static_cast<size_t>(o)] += acc;
      }
    }
    for (int o = 0; o < d; ++o) x[static_cast<size_t>(o)] += std::max(0.0f, y[static_cast<size_t>(o)]);
  }

  std::vector<float> z(static_cast<size_t>(d));
  std::vector<float> q(static_cast<size_t>(d)), kn(static_cast<size_t>(d)),
      vn(static_cast<size_t>(d));
  std::vector<float> merged(static_cast<size_t>(d)), proj(static_cast<size_t>(d));
  const std::vector<uint8_t> no_mask;

  for (int l = 0; l < L.layers; ++l) {
    const Impl::LayerW& lw = impl_->layers[static_cast<size_t>(l)];

    // Self-attention over cached keys/values plus this step's projection.
    ln_row(x.data(), d, *lw.ln1_g, *lw.ln1_b, z.data());
    vecmat(z.data(), *lw.self_wq, q.data());
    vecmat(z.data(), *lw.self_wk, kn.data());
    vecmat(z.data(), *lw.self_wv, vn.data());
    std::vector<float>& ks = state.self_k[static_cast<size_t>(l)];
    std::vector<float>& vs = state.self_v[static_cast<size_t>(l)];
    ks.insert(ks.end(), kn.begin(), kn.end());
    vs.insert(vs.end(), vn.begin(), vn.end());
    const int keys = t + 1;
    std::vector<float> scores(static_cast<size_t>(keys));
    for (int h = 0; h < heads; ++h) {
      const float* qh = q.data() + static_cast<size_t>(h) * dk;
      for (int j = 0; j < keys; ++j) {
        const float* kh = ks.data() + static_cast<size_t>(j) * d + static_cast<size_t>(h) * dk;
        float s = 0.0f;
        for (int c = 0; c < dk; ++c) s += qh[c] * kh[c];
        int delta = j - t;
        if (delta < -L.rel_clip) delta = -L.rel_clip;
        if (delta > L.rel_clip) delta = L.rel_clip;
        const float* rrow = lw.self_rel->row(delta + L.rel_clip);
        float rb = 0.0f;
        for (int c = 0; c < dk; ++c) rb += qh[c] * rrow[c];
        scores[static_cast<size_t>(j)] = (s + rb) * inv_sqrt_dk;
      }
      masked_softmax(scores.data(), keys, no_mask);
      for (int c = 0; c < dk; ++c) {
        float acc = 0.0f;
        for (int j = 0; j < keys; ++j) {
          acc += scores[static_cast<size_t>(j)] *
                 vs[static_cast<size_t>(j) * d + static_cast<size_t>(h) * dk + static_cast<size_t>(c)];
        }
        merged[static_cast<size_t>(h) * dk + static_cast<size_t>(c)] = acc;
      }
    }
    vecmat(merged.data(), *lw.self_wo, proj.data());
    for (int o = 0; o < d; ++o) x[static_cast<size_t>(o)] += proj[static_cast<size_t>(o)];

    if (L.has_cross) {
      ln_row(x.data(), d, *lw.ln2_g, *lw.ln2_b, z.data());
      vecmat(z.data(), *lw.cross_wq, q.data());
      const Tensor<float>& ck = cross->k[static_cast<size_t>(l)];
      const Tensor<float>& cv = cross->v[static_cast<size_t>(l)];
      const int frames = ck.rows();
      std::vector<float> cs(static_cast<size_t>(frames));
      for (int h = 0; h < heads; ++h) {
        const float* qh = q.data() + static_cast<size_t>(h) * dk;
        for (int j = 0; j < frames; ++j) {
          const float* kh = ck.row(j) + static_cast<size_t>(h) * dk;
          float s = 0.0f;
          for (int c = 0; c < dk; ++c) s += qh[c] * kh[c];
          cs[static_cast<size_t>(j)] = s * inv_sqrt_dk;
        }
        masked_softmax(cs.data(), frames, cross->mask);
        for (int c = 0; c < dk; ++c) {
          float acc = 0.0f;
          for (int j = 0; j < frames; ++j) {
            acc += cs[static_cast<size_t>(j)] * cv.row(j)[static_cast<size_t>(h) * dk + static_cast<size_t>(c)];
          }
          merged[static_cast<size_t>(h) * dk + static_cast<size_t>(c)] = acc;
        }
      }
      vecmat(merged.data(), *lw.cross_wo, proj.data());
      for (int o = 0; o < d; ++o) x[static_cast<size_t>(o)] += proj[static_cast<size_t>(o)];
    }

    // Feed-forward.
    ln_row(x.data(), d, *lw.ln3_g, *lw.ln3_b, z.data());
    std::vector<float> h1(static_cast<size_t>(L.ffn_dim));
    vecmat(z.data(), *lw.ffn_w1, h1.data());
    const float* b1 = lw.ffn_b1->row(0);
    for (int j = 0; j < L.ffn_dim; ++j) {
      h1[static_cast<size_t>(j)] = std::max(0.0f, h1[static_cast<size_t>(j)] + b1[j]);
    }
    vecmat(h1.data(), *lw.ffn_w2, proj.data());
    const float* b2 = lw.ffn_b2->row(0);
    for (int o = 0; o < d; ++o) x[static_cast<size_t>(o)] += proj[static_cast<size_t>(o)] + b2[o];
  }

  ln_row(x.data(), d, *impl_->lnf_g, *impl_->lnf_b, z.data());
  std::vector<float> logits(static_cast<size_t>(L.vocab));
  vecmat(z.data(), *impl_->out_w, logits.data());
  const float* ob = impl_->out_b->row(0);
  for (int v = 0; v < L.vocab; ++v) logits[static_cast<size_t>(v)] += ob[v];

  float mx = logits[0];
  for (int v = 1; v < L.vocab; ++v) mx = std::max(mx, logits[static_cast<size_t>(v)]);
  float sum = 0.0f;
  for (int v = 0; v < L.vocab; ++v) sum += std::exp(logits[static_cast<size_t>(v)] - mx);
  const float lse = mx + std::log(sum);
  for (int v = 0; v < L.vocab; ++v) logits[static_cast<size_t>(v)] -= lse;

  state.length += 1;
  return logits;
}

}  // namespace cjt::model
