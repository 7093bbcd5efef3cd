// model/blocks.h

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

#ifndef CJT_MODEL_BLOCKS_H_
#define CJT_MODEL_BLOCKS_H_

#include <map>
#include <string>
#include <vector>

#include "model/param_store.h"
#include "numerics/graph.h"

namespace cjt::model {

using GraphF = cjt::numerics::Graph<float>;

// Binds store parameters into one graph, one node per distinct name, so a
// parameter used twice doesn't get duplicate nodes.
class ParamBinder {
 public:
  ParamBinder(GraphF& g, ParamStore& store) : g_(g), store_(store) {}
  GraphF::Var operator()(const std::string& name);

 private:
  GraphF& g_;
  ParamStore& store_;
  std::map<std::string, GraphF::Var> cache_;
};

// Parameter registration for the shared sublayers. `base` is the full name
// prefix including the trailing dot.
void reg_layer_norm(ParamStore& store, const std::string& base, int dim);
void reg_attention(ParamStore& store, const std::string& base, int attn_dim,
                   int heads, int rel_clip);  // rel_clip < 0: no relative table
void reg_ffn(ParamStore& store, const std::string& base, int attn_dim, int ffn_dim);

// x [T,d] -> layer-normalized [T,d] with {base}g / {base}b.
GraphF::Var layer_norm_block(GraphF& g, ParamBinder& p, const std::string& base,
                             GraphF::Var x);

// Multi-head attention. Queries from q_in, keys/values from kv_in, heads
// split by column. When rel_clip >= 0 a per-layer relative-position table
// {base}rel (shared across heads, applied on the key side) is added to the
// scores before the 1/sqrt(dk) scaling. key_mask empty = all keys valid.
GraphF::Var attention_block(GraphF& g, ParamBinder& p, const std::string& base,
                            GraphF::Var q_in, GraphF::Var kv_in,
                            const std::vector<uint8_t>& key_mask, bool causal,
                            int heads, int rel_clip);

// Position-wise feed-forward: w2*relu(w1*x+b1)+b2.
GraphF::Var ffn_block(GraphF& g, ParamBinder& p, const std::string& base,
                      GraphF::Var x);

}  // namespace cjt::model

#endif  // CJT_MODEL_BLOCKS_H_
