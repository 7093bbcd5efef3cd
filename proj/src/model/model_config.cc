// model/model_config.cc

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

#include "model/model_config.h"

#include "util/error.h"
#include "util/hash.h"
#include "util/strings.h"

namespace cjt::model {

using cjt::util::cat;

int AsrModelConfig::resolved_shallow() const {
  if (shallow_layer_count > 0) return shallow_layer_count;
  return (enc_layers + 2) / 3;
}

void AsrModelConfig::validate() const {
  if (mel_dim < 1) throw ConfigError("model: mel_dim must be >= 1");
  if (vocab_size < 5) throw ConfigError("model: vocab_size must cover specials + content");
  if (enc_conv_blocks < 1 || dec_conv_blocks < 0) {
    throw ConfigError("model: conv block counts out of range");
  }
  if (conv_channels < 1 || conv_kernel < 1 || conv_kernel % 2 == 0) {
    throw ConfigError("model: conv_channels >= 1 and odd conv_kernel required");
  }
  if (enc_layers < 1 || dec_layers < 1) throw ConfigError("model: layer counts must be >= 1");
  if (attn_dim < 1 || heads < 1 || attn_dim % heads != 0) {
    throw ConfigError(cat("model: attn_dim ", attn_dim, " not divisible by heads ", heads));
  }
  if (ffn_dim < 1) throw ConfigError("model: ffn_dim must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("model: dropout must be in [0,1)");
  if (rel_clip < 1) throw ConfigError("model: rel_clip must be >= 1");
  if (resolved_shallow() >= enc_layers) {
    throw ConfigError(cat("model: shallow_layer_count ", resolved_shallow(),
                          " must be < enc_layers ", enc_layers));
  }
}

uint64_t AsrModelConfig::fingerprint() const {
  uint64_t h = cjt::util::fnv1a64("asr-model-v1");
  auto mix = [&h](uint64_t v) { h = cjt::util::hash_combine(h, v); };
  mix(static_cast<uint64_t>(mel_dim));
  mix(static_cast<uint64_t>(vocab_size));
  mix(static_cast<uint64_t>(enc_conv_blocks));
  mix(static_cast<uint64_t>(conv_channels));
  mix(static_cast<uint64_t>(conv_kernel));
  mix(static_cast<uint64_t>(enc_layers));
  mix(static_cast<uint64_t>(dec_conv_blocks));
  mix(static_cast<uint64_t>(dec_layers));
  mix(static_cast<uint64_t>(attn_dim));
  mix(static_cast<uint64_t>(heads));
  mix(static_cast<uint64_t>(ffn_dim));
  mix(static_cast<uint64_t>(rel_clip));
  mix(static_cast<uint64_t>(resolved_shallow()));
  return h;
}

AsrModelConfig AsrModelConfig::from_kv(const cjt::util::KvConfig& cfg) {
  AsrModelConfig m;
  m.mel_dim = static_cast<int>(cfg.get_int("model.mel_dim", m.mel_dim));
  m.vocab_size = static_cast<int>(cfg.get_int("model.vocab_size", m.vocab_size));
  m.enc_conv_blocks = static_cast<int>(cfg.get_int("model.enc_conv_blocks", m.enc_conv_blocks));
  m.conv_channels = static_cast<int>(cfg.get_int("model.conv_channels", m.conv_channels));
  m.conv_kernel = static_cast<int>(cfg.get_int("model.conv_kernel", m.conv_kernel));
  m.enc_layers = static_cast<int>(cfg.get_int("model.enc_layers", m.enc_layers));
  m.dec_conv_blocks = static_cast<int>(cfg.get_int("model.dec_conv_blocks", m.dec_conv_blocks));
  m.dec_layers = static_cast<int>(cfg.get_int("model.dec_layers", m.dec_layers));
  m.attn_dim = static_cast<int>(cfg.get_int("model.attn_dim", m.attn_dim));
  m.heads = static_cast<int>(cfg.get_int("model.heads", m.heads));
  m.ffn_dim = static_cast<int>(cfg.get_int("model.ffn_dim", m.ffn_dim));
  m.dropout = cfg.get_double("model.dropout", m.dropout);
  m.rel_clip = static_cast<int>(cfg.get_int("model.rel_clip", m.rel_clip));
  m.shallow_layer_count =
      static_cast<int>(cfg.get_int("model.shallow_layer_count", m.shallow_layer_count));
  m.validate();
  return m;
}

void AsrModelConfig::to_kv(cjt::util::KvConfig& cfg) const {
  cfg.set_int("model.mel_dim", mel_dim);
  cfg.set_int("model.vocab_size", vocab_size);
  cfg.set_int("model.enc_conv_blocks", enc_conv_blocks);
  cfg.set_int("model.conv_channels", conv_channels);
  cfg.set_int("model.conv_kernel", conv_kernel);
  cfg.set_int("model.enc_layers", enc_layers);
  cfg.set_int("model.dec_conv_blocks", dec_conv_blocks);
  cfg.set_int("model.dec_layers", dec_layers);
  cfg.set_int("model.attn_dim", attn_dim);
  cfg.set_int("model.heads", heads);
  cfg.set_int("model.ffn_dim", ffn_dim);
  cfg.set_double("model.dropout", dropout);
  cfg.set_int("model.rel_clip", rel_clip);
  cfg.set_int("model.shallow_layer_count", shallow_layer_count);
}

void LmConfig::validate() const {
  if (vocab_size < 5) throw ConfigError("lm: vocab_size must cover specials + content");
  if (layers < 1) throw ConfigError("lm: layers must be >= 1");
  if (conv_blocks < 0) throw ConfigError("lm: conv_blocks must be >= 0");
  if (conv_kernel < 1 || conv_kernel % 2 == 0) {
    throw ConfigError("lm: odd conv_kernel required");
  }
  if (attn_dim < 1 || heads < 1 || attn_dim % heads != 0) {
    throw ConfigError(cat("lm: attn_dim ", attn_dim, " not divisible by heads ", heads));
  }
  if (ffn_dim < 1) throw ConfigError("lm: ffn_dim must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("lm: dropout must be in [0,1)");
  if (rel_clip < 1) throw ConfigError("lm: rel_clip must be >= 1");
}

uint64_t LmConfig::fingerprint() const {
  uint64_t h = cjt::util::fnv1a64("lm-model-v1");
  auto mix = [&h](uint64_t v) { h = cjt::util::hash_combine(h, v); };
  mix(static_cast<uint64_t>(vocab_size));
  mix(static_cast<uint64_t>(layers));
  mix(static_cast<uint64_t>(conv_blocks));
  mix(static_cast<uint64_t>(conv_kernel));
  mix(static_cast<uint64_t>(attn_dim));
  mix(static_cast<uint64_t>(heads));
  mix(static_cast<uint64_t>(ffn_dim));
  mix(static_cast<uint64_t>(rel_clip));
  return h;
}

LmConfig LmConfig::from_kv(const cjt::util::KvConfig& cfg) {
  LmConfig m;
  m.vocab_size = static_cast<int>(cfg.get_int("lm.vocab_size", m.vocab_size));
  m.layers = static_cast<int>(cfg.get_int("lm.layers", m.layers));
  m.conv_blocks = static_cast<int>(cfg.get_int("lm.conv_blocks", m.conv_blocks));
  m.conv_kernel = static_cast<int>(cfg.get_int("lm.conv_kernel", m.conv_kernel));
  m.attn_dim = static_cast<int>(cfg.get_int("lm.attn_dim", m.attn_dim));
  m.heads = static_cast<int>(cfg.get_int("lm.heads", m.heads));
  m.ffn_dim = static_cast<int>(cfg.get_int("lm.ffn_dim", m.ffn_dim));
  m.dropout = cfg.get_double("lm.dropout", m.dropout);
  m.rel_clip = static_cast<int>(cfg.get_int("lm.rel_clip", m.rel_clip));
  m.validate();
  return m;
}

void LmConfig::to_kv(cjt::util::KvConfig& cfg) const {
  cfg.set_int("lm.vocab_size", vocab_size);
  cfg.set_int("lm.layers", layers);
  cfg.set_int("lm.conv_blocks", conv_blocks);
  cfg.set_int("lm.conv_kernel", conv_kernel);
  cfg.set_int("lm.attn_dim", attn_dim);
  cfg.set_int("lm.heads", heads);
  cfg.set_int("lm.ffn_dim", ffn_dim);
  cfg.set_double("lm.dropout", dropout);
  cfg.set_int("lm.rel_clip", rel_clip);
}

}  // namespace cjt::model
