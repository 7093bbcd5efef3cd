// model/blocks.cc

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

#include "model/blocks.h"

#include <cmath>

#include "util/error.h"

namespace cjt::model {

GraphF::Var ParamBinder::operator()(const std::string& name) {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  GraphF::Var v = g_.param(store_.value(name), &store_.grad(name));
  cache_.emplace(name, v);
  return v;
}

void reg_layer_norm(ParamStore& store, const std::string& base, int dim) {
  store.add(base + "g", {1, dim}, InitSpec::ones());
  store.add(base + "b", {1, dim}, InitSpec::zeros());
}

void reg_attention(ParamStore& store, const std::string& base, int attn_dim,
                   int heads, int rel_clip) {
  if (attn_dim % heads != 0)
    throw Error("attention dim not divisible by heads at " + base);
  InitSpec lin = InitSpec::uniform(std::sqrt(1.0 / attn_dim));
  store.add(base + "wq", {attn_dim, attn_dim}, lin);
  store.add(base + "wk", {attn_dim, attn_dim}, lin);
  store.add(base + "wv", {attn_dim, attn_dim}, lin);
  store.add(base + "wo", {attn_dim, attn_dim}, lin);
  if (rel_clip >= 0) {
    int dk = attn_dim / heads;
    store.add(base + "rel", {2 * rel_clip + 1, dk},
              InitSpec::uniform(std::sqrt(1.0 / attn_dim)));
  }
}

void reg_ffn(ParamStore& store, const std::string& base, int attn_dim, int ffn_dim) {
  store.add(base + "w1", {attn_dim, ffn_dim},
            InitSpec::uniform(std::sqrt(1.0 / attn_dim)));
  store.add(base + "b1", {1, ffn_dim}, InitSpec::zeros());
  store.add(base + "w2", {ffn_dim, attn_dim},
            InitSpec::uniform(std::sqrt(1.0 / ffn_dim)));
  store.add(base + "b2", {1, attn_dim}, InitSpec::zeros());
}

GraphF::Var layer_norm_block(GraphF& g, ParamBinder& p, const std::string& base,
                             GraphF::Var x) {
  return g.layer_norm(x, p(base + "g"), p(base + "b"));
}

GraphF::Var attention_block(GraphF& g, ParamBinder& p, const std::string& base,
                            GraphF::Var q_in, GraphF::Var kv_in,
                            const std::vector<uint8_t>& key_mask, bool causal,
                            int heads, int rel_clip) {
  const int d = g.value(q_in).cols();
  if (d % heads != 0) throw Error("attention dim not divisible by heads");
  const int dk = d / heads;
  const float inv_sqrt_dk = 1.0f / std::sqrt(static_cast<float>(dk));

  GraphF::Var q = g.matmul(q_in, p(base + "wq"));
  GraphF::Var k = g.matmul(kv_in, p(base + "wk"));
  GraphF::Var v = g.matmul(kv_in, p(base + "wv"));

  const int keys = g.value(kv_in).rows();
  GraphF::Var merged = -1;
  for (int h = 0; h < heads; ++h) {
    GraphF::Var qh = g.slice_cols(q, h * dk, (h + 1) * dk);
    GraphF::Var kh = g.slice_cols(k, h * dk, (h + 1) * dk);
    GraphF::Var vh = g.slice_cols(v, h * dk, (h + 1) * dk);
    GraphF::Var scores = g.matmul_nt(qh, kh);
    if (rel_clip >= 0) {
      // Key-side relative positions: scores[i][j] += q_i . rel[j - i].
      GraphF::Var rel_scores = g.matmul_nt(qh, p(base + "rel"));
      scores = g.add(scores, g.relative_bias(rel_scores, keys, rel_clip));
    }
    scores = g.scale(scores, inv_sqrt_dk);
    GraphF::Var w = g.attn_softmax(scores, key_mask, causal);
    GraphF::Var ctx = g.matmul(w, vh);
    merged = (h == 0) ? ctx : g.concat_cols(merged, ctx);
  }
  return g.matmul(merged, p(base + "wo"));
}

GraphF::Var ffn_block(GraphF& g, ParamBinder& p, const std::string& base,
                      GraphF::Var x) {
  GraphF::Var h = g.relu(g.add(g.matmul(x, p(base + "w1")), p(base + "b1")));
  return g.add(g.matmul(h, p(base + "w2")), p(base + "b2"));
}

}  // namespace cjt::model
