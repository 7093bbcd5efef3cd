// analysis/histogram.h

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

#ifndef CJT_ANALYSIS_HISTOGRAM_H_
#define CJT_ANALYSIS_HISTOGRAM_H_

#include <string>
#include <vector>

#include "pairgen/pair_set.h"
#include "synthtask/manifest.h"
#include "synthtask/vocab.h"

namespace cjt::analysis {

// Distribution of per-token confidences split by whether the pseudo-label
// token is right. Correctness comes from the edit alignment of each
// pseudo-label against its sealed reference: tokens under match operations
// count as correct, everything else as incorrect.
struct ConfidenceHistogram {
  int bins = 0;
  std::vector<long long> correct;
  std::vector<long long> incorrect;
  long long correct_total = 0;
  long long incorrect_total = 0;
  double correct_mean = 0.0;
  double incorrect_mean = 0.0;
};

// Every pair must carry confidences (score them first) and a reference:
// the manifest record with the same id supplies its sealed transcript, or
// the visible one if nothing is sealed. This is strictly an evaluation
// diagnostic; nothing here feeds training.
ConfidenceHistogram confidence_histogram(const cjt::pairgen::PairSet& pairs,
                                         const cjt::synthtask::Manifest& refs,
                                         const cjt::synthtask::Vocab& vocab, int bins);

// Tab-separated (bin_low, bin_high, class, count).
std::string render_histogram(const ConfidenceHistogram& h);

}  // namespace cjt::analysis

#endif  // CJT_ANALYSIS_HISTOGRAM_H_
