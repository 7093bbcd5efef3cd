// model/param_store.cc

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

#include "model/param_store.h"

#include <cstring>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::model {

using cjt::numerics::Tensor;
using cjt::util::cat;

void ParamStore::add(const std::string& name, std::vector<int> shape, InitSpec init) {
  if (entries_.count(name)) throw Error(cat("duplicate parameter: ", name));
  Entry e;
  e.value = Tensor<float>(shape);
  e.grad = Tensor<float>(std::move(shape));
  e.init = init;
  entries_.emplace(name, std::move(e));
}

namespace {
ParamStore::Entry& find_entry(std::map<std::string, ParamStore::Entry>& m,
                              const std::string& name) {
  auto it = m.find(name);
  if (it == m.end()) throw Error(cat("unknown parameter: ", name));
  return it->second;
}
}  // namespace

Tensor<float>& ParamStore::value(const std::string& name) {
  return find_entry(entries_, name).value;
}

const Tensor<float>& ParamStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error(cat("unknown parameter: ", name));
  return it->second.value;
}

Tensor<float>& ParamStore::grad(const std::string& name) {
  return find_entry(entries_, name).grad;
}

void ParamStore::init(cjt::util::Rng& rng) {
  for (auto& [name, e] : entries_) {
    switch (e.init.kind) {
      case InitSpec::Kind::zeros:
        e.value.fill(0.0f);
        break;
      case InitSpec::Kind::ones:
        e.value.fill(1.0f);
        break;
      case InitSpec::Kind::uniform: {
        const double s = e.init.scale;
        float* d = e.value.data();
        for (size_t i = 0; i < e.value.numel(); ++i) {
          d[i] = static_cast<float>((rng.uniform() * 2.0 - 1.0) * s);
        }
        break;
      }
    }
  }
}

void ParamStore::zero_grads() {
  for (auto& [name, e] : entries_) {
    std::memset(e.grad.data(), 0, e.grad.numel() * sizeof(float));
  }
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

size_t ParamStore::scalar_count() const {
  size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.numel();
  return n;
}

bool ParamStore::grads_all_finite() const {
  for (const auto& [name, e] : entries_) {
    if (!e.grad.all_finite()) return false;
  }
  return true;
}

}  // namespace cjt::model
