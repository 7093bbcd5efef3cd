// model/model_config.h

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

#ifndef CJT_MODEL_MODEL_CONFIG_H_
#define CJT_MODEL_MODEL_CONFIG_H_

#include <cstdint>

#include "util/kv_config.h"

namespace cjt::model {

// Encoder-decoder shape. Defaults are the desk-scale setup; the larger
// published-style setup is reachable purely through config.
struct AsrModelConfig {
  int mel_dim = 16;
  int vocab_size = 44;
  int enc_conv_blocks = 1;   // 2-D conv front-end blocks, each stride 2 in time
  int conv_channels = 8;
  int conv_kernel = 3;
  int enc_layers = 4;
  int dec_conv_blocks = 1;   // causal 1-D conv blocks ahead of decoder layers
  int dec_layers = 2;
  int attn_dim = 64;
  int heads = 4;
  int ffn_dim = 128;
  double dropout = 0.15;
  int rel_clip = 64;         // relative-distance clipping for attention bias
  // 0 means auto: ceil(enc_layers / 3), mirroring 4 shallow of 12 layers.
  int shallow_layer_count = 0;

  int resolved_shallow() const;
  void validate() const;
  uint64_t fingerprint() const;

  static AsrModelConfig from_kv(const cjt::util::KvConfig& cfg);
  void to_kv(cjt::util::KvConfig& cfg) const;
};

// Decoder-only language model over the same vocabulary.
struct LmConfig {
  int vocab_size = 44;
  int layers = 2;
  int conv_blocks = 1;
  int conv_kernel = 3;
  int attn_dim = 64;
  int heads = 4;
  int ffn_dim = 128;
  double dropout = 0.15;
  int rel_clip = 64;

  void validate() const;
  uint64_t fingerprint() const;

  static LmConfig from_kv(const cjt::util::KvConfig& cfg);
  void to_kv(cjt::util::KvConfig& cfg) const;
};

}  // namespace cjt::model

#endif  // CJT_MODEL_MODEL_CONFIG_H_
