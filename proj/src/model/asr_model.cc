// model/asr_model.cc

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

#include "model/asr_model.h"

#include <cmath>

#include "synthtask/vocab.h"
#include "util/error.h"
#include "util/strings.h"

namespace cjt::model {

using cjt::numerics::Tensor;
using cjt::util::cat;
using cjt::Error;
using cjt::ShapeError;

namespace {

// Encoder parameters. The conv front-end flattens channels into the feature
// axis, so block b maps width f to width f*channels; the projection then
// takes the flattened width down to attn_dim.
void register_encoder_params(ParamStore& store, const AsrModelConfig& cfg) {
  int width = cfg.mel_dim;
  for (int b = 0; b < cfg.enc_conv_blocks; ++b) {
    const std::string base = cat("enc.conv", b, ".");
    store.add(base + "w", {cfg.conv_channels, cfg.conv_kernel, cfg.conv_kernel},
              InitSpec::uniform(std::sqrt(1.0 / (cfg.conv_kernel * cfg.conv_kernel))));
    store.add(base + "b", {1, cfg.conv_channels}, InitSpec::zeros());
    width *= cfg.conv_channels;
  }
  store.add("enc.proj.w", {width, cfg.attn_dim},
            InitSpec::uniform(std::sqrt(1.0 / width)));
  store.add("enc.proj.b", {1, cfg.attn_dim}, InitSpec::zeros());
  for (int i = 0; i < cfg.enc_layers; ++i) {
    const std::string base = cat("enc.l", i, ".");
    reg_layer_norm(store, base + "ln1.", cfg.attn_dim);
    reg_attention(store, base + "attn.", cfg.attn_dim, cfg.heads, cfg.rel_clip);
    reg_layer_norm(store, base + "ln2.", cfg.attn_dim);
    reg_ffn(store, base + "ffn.", cfg.attn_dim, cfg.ffn_dim);
  }
  reg_layer_norm(store, "enc.lnf.", cfg.attn_dim);
}

}  // namespace

AsrModel::AsrModel(const AsrModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  register_encoder_params(store_, cfg_);
  register_decoder_params(store_, decoder_layout());
}

DecoderLayout AsrModel::decoder_layout() const {
  DecoderLayout L;
  L.prefix = "dec.";
  L.vocab = cfg_.vocab_size;
  L.layers = cfg_.dec_layers;
  L.conv_blocks = cfg_.dec_conv_blocks;
  L.conv_kernel = cfg_.conv_kernel;
  L.attn_dim = cfg_.attn_dim;
  L.heads = cfg_.heads;
  L.ffn_dim = cfg_.ffn_dim;
  L.rel_clip = cfg_.rel_clip;
  L.has_cross = true;
  L.dropout = cfg_.dropout;
  return L;
}

Checkpoint AsrModel::snapshot(uint64_t updates, const std::string& round_tag) const {
  return Checkpoint::from_store(store_, fingerprint(), updates, round_tag);
}

void AsrModel::load(const Checkpoint& ck) {
  if (ck.fingerprint != fingerprint()) {
    throw Error(cat("checkpoint fingerprint ", ck.fingerprint,
                    " does not match model ", fingerprint()));
  }
  ck.into_store(store_);
}

int AsrModel::post_conv_frames(int frames) const {
  int t = frames;
  for (int b = 0; b < cfg_.enc_conv_blocks; ++b) t = (t + 1) / 2;
  return t;
}

std::vector<std::string> AsrModel::shallow_param_names() const {
  std::vector<std::string> prefixes;
  for (int b = 0; b < cfg_.enc_conv_blocks; ++b) prefixes.push_back(cat("enc.conv", b, "."));
  prefixes.push_back("enc.proj.");
  for (int i = 0; i < cfg_.resolved_shallow(); ++i) prefixes.push_back(cat("enc.l", i, "."));
  std::vector<std::string> out;
  for (const std::string& name : store_.names()) {
    for (const std::string& pre : prefixes) {
      if (name.rfind(pre, 0) == 0) {
        out.push_back(name);
        break;
      }
    }
  }
  return out;
}

AsrModel::EncodeResult AsrModel::encode(GraphF& g, const Tensor<float>& feats,
                                        const std::vector<uint8_t>& in_frame_mask,
                                        bool gate_open, bool want_taps) {
  if (feats.rank() != 2 || feats.cols() != cfg_.mel_dim) {
    throw ShapeError(cat("encode: features ", feats.shape_str(), " for mel ",
                         cfg_.mel_dim));
  }
  if (feats.rows() < 1) throw Error("encode: empty audio");
  if (!in_frame_mask.empty() &&
      static_cast<int>(in_frame_mask.size()) != feats.rows()) {
    throw ShapeError(cat("encode: frame mask size ", in_frame_mask.size(),
                         " for ", feats.rows(), " frames"));
  }

  ParamBinder p(g, store_);
  GraphF::Var x = g.input(feats);
  std::vector<uint8_t> mask = in_frame_mask;
  for (int b = 0; b < cfg_.enc_conv_blocks; ++b) {
    const std::string base = cat("enc.conv", b, ".");
    x = g.relu(g.conv2d(x, p(base + "w"), p(base + "b"), /*stride_t=*/2));
    if (!mask.empty()) {
      // A stride-2 output frame is valid iff the input frame it starts on is.
      std::vector<uint8_t> down((mask.size() + 1) / 2);
      for (size_t i = 0; i < down.size(); ++i) down[i] = mask[2 * i];
      mask = std::move(down);
    }
  }
  x = g.add(g.matmul(x, p("enc.proj.w")), p("enc.proj.b"));

  EncodeResult res;
  const int shallow = cfg_.resolved_shallow();
  for (int i = 0; i < cfg_.enc_layers; ++i) {
    const std::string base = cat("enc.l", i, ".");
    GraphF::Var z = layer_norm_block(g, p, base + "ln1.", x);
    GraphF::Var attn = attention_block(g, p, base + "attn.", z, z, mask,
                                       /*causal=*/false, cfg_.heads, cfg_.rel_clip);
    x = g.add(x, g.dropout(attn, cfg_.dropout));
    z = layer_norm_block(g, p, base + "ln2.", x);
    x = g.add(x, g.dropout(ffn_block(g, p, base + "ffn.", z), cfg_.dropout));
    if (want_taps) res.taps.push_back(x);
    if (i + 1 == shallow) x = g.grad_gate(x, gate_open);
  }
  res.memory = layer_norm_block(g, p, "enc.lnf.", x);
  res.frame_mask = std::move(mask);
  return res;
}

GraphF::Var AsrModel::decode_logits(GraphF& g, const EncodeResult& enc,
                                    const std::vector<int>& history) {
  if (history.empty() || history.front() != synthtask::kBos) {
    throw Error("decode: target history must begin with BOS");
  }
  ParamBinder p(g, store_);
  return build_decoder_graph(g, p, decoder_layout(), history, &enc.memory,
                             &enc.frame_mask);
}

AsrModel::Forward AsrModel::forward(GraphF& g, const Tensor<float>& feats,
                                    const std::vector<int>& history,
                                    bool gate_open, bool want_taps) {
  Forward f;
  f.enc = encode(g, feats, {}, gate_open, want_taps);
  f.logits = decode_logits(g, f.enc, history);
  return f;
}

Tensor<float> AsrModel::encode_eval(const Tensor<float>& feats,
                                    std::vector<Tensor<float>>* taps) {
  GraphF g(GraphF::Mode::eval);
  EncodeResult enc = encode(g, feats, {}, /*gate_open=*/true, taps != nullptr);
  if (taps != nullptr) {
    taps->clear();
    for (GraphF::Var t : enc.taps) taps->push_back(g.value(t).clone());
  }
  return g.value(enc.memory).clone();
}

DecoderStepper AsrModel::make_stepper() const {
  return DecoderStepper(store_, decoder_layout());
}

}  // namespace cjt::model
