// util/rng.h

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

#ifndef CJT_UTIL_RNG_H_
#define CJT_UTIL_RNG_H_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>

namespace cjt::util {

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact by
// the standard); the distributions are hand-rolled so draws are bit-exact
// across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling, no modulo bias.
  int64_t uniform_int(int64_t lo, int64_t hi);

  // Standard normal via Box-Muller with a cached spare.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives the seed of a named stream from a master seed. Streams with
// different names are statistically independent, so consuming one never
// perturbs another.
uint64_t derive_seed(uint64_t master, std::string_view name);
uint64_t derive_seed(uint64_t master, std::string_view name, uint64_t index);

// Named stream registry. stream("dropout"), stream("syngr"), ... each get an
// independently seeded Rng created on first use.
class RngPool {
 public:
  explicit RngPool(uint64_t master) : master_(master) {}

  Rng& stream(std::string_view name);
  uint64_t master() const { return master_; }

 private:
  uint64_t master_;
  std::map<std::string, Rng, std::less<>> streams_;
};

}  // namespace cjt::util

#endif  // CJT_UTIL_RNG_H_
