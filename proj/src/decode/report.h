// decode/report.h

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

#ifndef CJT_DECODE_REPORT_H_
#define CJT_DECODE_REPORT_H_

#include <string>
#include <utility>
#include <vector>

#include "decode/wer.h"
#include "synthtask/vocab.h"

namespace cjt::decode {

struct UttScore {
  std::string id;
  std::vector<int> ref;
  std::vector<int> hyp;
  WerResult result;
};

struct ScoreTotals {
  int utterances = 0;
  int ref_tokens = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;

  // Corpus WER: total errors over total reference tokens.
  double wer() const;
};

ScoreTotals score_totals(const std::vector<UttScore>& scores);

// Line-delimited per-utterance records (id, WER, ops, ref, hyp) followed by
// a summary block. Output is a pure function of the scores: fixed decimal
// widths, no timestamps, so identical runs produce identical bytes.
std::string render_score_report(const synthtask::Vocab& vocab,
                                const std::vector<UttScore>& scores);

// Hypothesis table for the decode stage artifact: "id\ttranscript" per line,
// "-" standing in for an empty transcript.
std::string render_hyps(const std::vector<std::pair<std::string, std::string>>& hyps);
std::vector<std::pair<std::string, std::string>> parse_hyps(const std::string& text,
                                                            const std::string& origin);

}  // namespace cjt::decode

#endif  // CJT_DECODE_REPORT_H_
