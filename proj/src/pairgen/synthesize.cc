// pairgen/synthesize.cc

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

#include "pairgen/synthesize.h"

#include <algorithm>
#include <cmath>

#include "util/error.h"
#include "util/rng.h"
#include "util/strings.h"

namespace cjt::pairgen {

using cjt::util::cat;
using cjt::util::Rng;

PairSet synthesize_pairs(const synthtask::Manifest& unpaired_text,
                         const synthtask::Vocab& vocab, double fraction,
                         uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw ConfigError(cat("synthesize: fraction ", fraction, " outside (0,1]"));
  }
  const size_t n = unpaired_text.records.size();
  if (n == 0) throw Error("synthesize: empty manifest");

  size_t take = static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
  take = std::min(n, std::max<size_t>(1, take));

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng sample_rng(util::derive_seed(seed, "pairgen.synthesize.sample"));
  for (size_t i = n; i > 1; --i) {
    const size_t j = static_cast<size_t>(
        sample_rng.uniform_int(0, static_cast<int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<size_t> picked(order.begin(), order.begin() + static_cast<long>(take));
  std::sort(picked.begin(), picked.end());

  Rng render_rng(util::derive_seed(seed, "pairgen.synthesize.render"));
  PairSet out;
  out.records.reserve(take);
  for (size_t idx : picked) {
    const synthtask::ManifestRecord& rec = unpaired_text.records[idx];
    if (rec.provenance != "unpaired-text") {
      throw Error(cat("synthesize: record ", rec.id, " has provenance '",
                      rec.provenance, "'"));
    }
    if (rec.transcript.empty()) {
      throw Error(cat("synthesize: record ", rec.id, " has no transcript"));
    }
    PairRecord pr;
    pr.id = rec.id;
    pr.target = vocab.encode(rec.transcript);
    pr.audio = synthtask::AudioRef::rendered("tts", "clean", render_rng.next_u64());
    pr.provenance = kProvSynAText;
    out.records.push_back(std::move(pr));
  }
  return out;
}

}  // namespace cjt::pairgen
