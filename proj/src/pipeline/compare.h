// pipeline/compare.h

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

#ifndef CJT_PIPELINE_COMPARE_H_
#define CJT_PIPELINE_COMPARE_H_

#include <map>
#include <string>
#include <vector>

namespace cjt::pipeline {

// One run's scoring summary: WER per "<set>:<mode>" cell.
struct RunSummary {
  std::string label;
  std::map<std::string, double> wer;
};

// Parses a reports/summary.tsv produced by the score stage.
RunSummary parse_summary(const std::string& text, const std::string& label,
                         const std::string& origin);

// Method-by-column WER table over several runs. Every run must cover the
// same eval-set/mode cells; rows keep the given order, columns sort by name.
// Purely a function of the inputs, so equal summaries render equal bytes.
std::string render_compare(const std::vector<RunSummary>& runs);

}  // namespace cjt::pipeline

#endif  // CJT_PIPELINE_COMPARE_H_
