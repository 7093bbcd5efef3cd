// model/checkpoint.cc

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

#include "model/checkpoint.h"

#include <filesystem>
#include <fstream>

#include "util/error.h"
#include "util/io.h"
#include "util/strings.h"

namespace cjt::model {

using cjt::numerics::Tensor;
using cjt::util::cat;

namespace {
constexpr uint32_t kMagic = 0x31504b43;  // "CKP1"
}

Checkpoint Checkpoint::from_store(const ParamStore& store, uint64_t fingerprint,
                                  uint64_t updates, const std::string& round_tag) {
  Checkpoint ck;
  ck.fingerprint = fingerprint;
  ck.updates = updates;
  ck.round_tag = round_tag;
  for (const auto& [name, e] : store.entries()) {
    ck.params.emplace(name, e.value.clone());
  }
  return ck;
}

void Checkpoint::into_store(ParamStore& store) const {
  if (params.size() != store.param_count()) {
    throw Error(cat("checkpoint has ", params.size(), " parameters, store wants ",
                    store.param_count()));
  }
  for (const auto& [name, tensor] : params) {
    if (!store.has(name)) throw Error(cat("checkpoint parameter not in model: ", name));
    Tensor<float>& dst = store.value(name);
    if (!dst.same_shape(tensor)) {
      throw Error(cat("checkpoint parameter ", name, " has shape ",
                      tensor.shape_str(), ", model wants ", dst.shape_str()));
    }
    std::copy(tensor.data(), tensor.data() + tensor.numel(), dst.data());
  }
}

void Checkpoint::save(const std::string& path) const {
  namespace io = cjt::util;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(cat("cannot open checkpoint for writing: ", tmp));
    io::put_u32(out, kMagic);
    io::put_u64(out, fingerprint);
    io::put_u64(out, updates);
    io::put_string(out, round_tag);
    io::put_u32(out, static_cast<uint32_t>(params.size()));
    for (const auto& [name, tensor] : params) {
      io::put_string(out, name);
      io::put_u32(out, static_cast<uint32_t>(tensor.rank()));
      for (int i = 0; i < tensor.rank(); ++i) {
        io::put_u32(out, static_cast<uint32_t>(tensor.dim(i)));
      }
      io::put_f32_array(out, tensor.data(), tensor.numel());
    }
    if (!out) throw Error(cat("short write to checkpoint: ", tmp));
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  namespace io = cjt::util;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(cat("cannot open checkpoint: ", path));
  if (io::get_u32(in, path) != kMagic) throw Error(cat("bad checkpoint magic in ", path));
  Checkpoint ck;
  ck.fingerprint = io::get_u64(in, path);
  ck.updates = io::get_u64(in, path);
  ck.round_tag = io::get_string(in, path);
  const uint32_t count = io::get_u32(in, path);
  for (uint32_t p = 0; p < count; ++p) {
    std::string name = io::get_string(in, path);
    const uint32_t rank = io::get_u32(in, path);
    if (rank > 4) throw Error(cat("implausible rank ", rank, " in ", path));
    std::vector<int> shape(rank);
    size_t numel = 1;
    for (uint32_t i = 0; i < rank; ++i) {
      shape[i] = static_cast<int>(io::get_u32(in, path));
      numel *= static_cast<size_t>(shape[i]);
    }
    std::vector<float> data(numel);
    io::get_f32_array(in, data.data(), numel, path);
    ck.params.emplace(std::move(name),
                      Tensor<float>::from(std::move(shape), std::move(data)));
  }
  return ck;
}

Checkpoint average_checkpoints(const std::vector<Checkpoint>& cks) {
  if (cks.empty()) throw Error("average_checkpoints: no checkpoints");
  const Checkpoint& first = cks.front();
  for (const Checkpoint& ck : cks) {
    if (ck.fingerprint != first.fingerprint) {
      throw Error("average_checkpoints: fingerprint mismatch");
    }
    if (ck.params.size() != first.params.size()) {
      throw Error("average_checkpoints: parameter set mismatch");
    }
  }
  Checkpoint out;
  out.fingerprint = first.fingerprint;
  out.updates = cks.back().updates;
  out.round_tag = cks.back().round_tag;
  const double inv = 1.0 / static_cast<double>(cks.size());
  for (const auto& [name, ref] : first.params) {
    Tensor<float> mean(ref.shape());
    std::vector<double> acc(ref.numel(), 0.0);
    for (const Checkpoint& ck : cks) {
      auto it = ck.params.find(name);
      if (it == ck.params.end() || !it->second.same_shape(ref)) {
        throw Error(cat("average_checkpoints: parameter ", name, " mismatched"));
      }
      const float* src = it->second.data();
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += static_cast<double>(src[i]);
    }
    float* dst = mean.data();
    for (size_t i = 0; i < acc.size(); ++i) {
      dst[i] = static_cast<float>(acc[i] * inv);
    }
    out.params.emplace(name, std::move(mean));
  }
  return out;
}

}  // namespace cjt::model
