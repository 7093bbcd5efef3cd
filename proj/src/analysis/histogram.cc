// analysis/histogram.cc

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

#include "analysis/histogram.h"

#include <algorithm>
#include <map>
#include <sstream>

#include "decode/wer.h"
#include "util/error.h"
#include "util/strings.h"

namespace cjt::analysis {

using cjt::pairgen::PairRecord;

ConfidenceHistogram confidence_histogram(const cjt::pairgen::PairSet& pairs,
                                         const cjt::synthtask::Manifest& refs,
                                         const cjt::synthtask::Vocab& vocab, int bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");

  std::map<std::string, const cjt::synthtask::ManifestRecord*> by_id;
  for (const auto& r : refs.records) by_id[r.id] = &r;

  ConfidenceHistogram h;
  h.bins = bins;
  h.correct.assign(static_cast<size_t>(bins), 0);
  h.incorrect.assign(static_cast<size_t>(bins), 0);
  double correct_sum = 0.0, incorrect_sum = 0.0;

  for (const PairRecord& r : pairs.records) {
    if (r.confidences.size() != r.target.size())
      throw ConfigError("record '" + r.id + "' is unscored; confidences are required");
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw ConfigError("no reference record for '" + r.id + "'");
    const std::string& ref_text =
        it->second->sealed.empty() ? it->second->transcript : it->second->sealed;
    std::vector<int> ref = vocab.encode(ref_text);

    std::vector<uint8_t> correct_flags;
    if (r.target.empty()) continue;
    if (ref.empty()) {
      correct_flags.assign(r.target.size(), 0);  // pure insertions
    } else {
      correct_flags = cjt::decode::wer(ref, r.target).alignment.hyp_correct;
    }
    for (size_t i = 0; i < r.target.size(); ++i) {
      double p = r.confidences[i];
      int bin = std::min(bins - 1, static_cast<int>(p * bins));
      if (correct_flags[i]) {
        ++h.correct[static_cast<size_t>(bin)];
        ++h.correct_total;
        correct_sum += p;
      } else {
        ++h.incorrect[static_cast<size_t>(bin)];
        ++h.incorrect_total;
        incorrect_sum += p;
      }
    }
  }
  if (h.correct_total > 0) h.correct_mean = correct_sum / static_cast<double>(h.correct_total);
  if (h.incorrect_total > 0)
    h.incorrect_mean = incorrect_sum / static_cast<double>(h.incorrect_total);
  return h;
}

std::string render_histogram(const ConfidenceHistogram& h) {
  std::ostringstream os;
  os << "# bin_low\tbin_high\tclass\tcount\n";
  double width = 1.0 / h.bins;
  for (int b = 0; b < h.bins; ++b) {
    os << cjt::util::fmt_fixed(b * width, 4) << '\t' << cjt::util::fmt_fixed((b + 1) * width, 4)
       << "\tcorrect\t" << h.correct[static_cast<size_t>(b)] << '\n';
  }
  for (int b = 0; b < h.bins; ++b) {
    os << cjt::util::fmt_fixed(b * width, 4) << '\t' << cjt::util::fmt_fixed((b + 1) * width, 4)
       << "\tincorrect\t" << h.incorrect[static_cast<size_t>(b)] << '\n';
  }
  return os.str();
}

}  // namespace cjt::analysis
