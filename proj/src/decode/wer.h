// decode/wer.h

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

#ifndef CJT_DECODE_WER_H_
#define CJT_DECODE_WER_H_

#include <string>
#include <vector>

namespace cjt::decode {

enum class EditOp { match, sub, ins, del };

// Edit-op sequence between a reference and a hypothesis, plus a per
// hypothesis-token correctness flag (1 only where the token aligned as a
// match). Op counts reproduce the edit distance.
struct Alignment {
  std::vector<EditOp> ops;
  std::vector<uint8_t> hyp_correct;
  int matches = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;

  int distance() const { return substitutions + deletions + insertions; }
};

struct WerResult {
  double rate = 0.0;  // (S+D+I) / len(ref)
  Alignment alignment;
};

// Levenshtein with unit costs. Backtrace prefers match, then substitution,
// then deletion, then insertion, which pins a single alignment for every
// input pair. Empty reference is an error.
WerResult wer(const std::vector<int>& ref, const std::vector<int>& hyp);

// Compact op string, one char per op: '=' match, 'S', 'D', 'I'.
std::string alignment_string(const Alignment& a);

}  // namespace cjt::decode

#endif  // CJT_DECODE_WER_H_
