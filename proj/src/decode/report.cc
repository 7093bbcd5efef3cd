// decode/report.cc

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

#include "decode/report.h"

#include "util/error.h"
#include "util/strings.h"

namespace cjt::decode {

using cjt::util::cat;
using cjt::util::fmt_fixed;

double ScoreTotals::wer() const {
  if (ref_tokens == 0) return 0.0;
  return static_cast<double>(substitutions + deletions + insertions) /
         static_cast<double>(ref_tokens);
}

ScoreTotals score_totals(const std::vector<UttScore>& scores) {
  ScoreTotals t;
  for (const UttScore& s : scores) {
    t.utterances += 1;
    t.ref_tokens += static_cast<int>(s.ref.size());
    t.substitutions += s.result.alignment.substitutions;
    t.deletions += s.result.alignment.deletions;
    t.insertions += s.result.alignment.insertions;
  }
  return t;
}

std::string render_score_report(const synthtask::Vocab& vocab,
                                const std::vector<UttScore>& scores) {
  std::string out = "# id\twer\tops\tref\thyp\n";
  for (const UttScore& s : scores) {
    const std::string ref = vocab.decode(s.ref);
    const std::string hyp = vocab.decode(s.hyp);
    out += cat(s.id, "\t", fmt_fixed(s.result.rate, 4), "\t",
               alignment_string(s.result.alignment), "\t", ref, "\t",
               hyp.empty() ? "-" : hyp, "\n");
  }
  const ScoreTotals t = score_totals(scores);
  out += "# summary\n";
  out += cat("utterances = ", t.utterances, "\n");
  out += cat("ref_tokens = ", t.ref_tokens, "\n");
  out += cat("substitutions = ", t.substitutions, "\n");
  out += cat("deletions = ", t.deletions, "\n");
  out += cat("insertions = ", t.insertions, "\n");
  out += cat("wer = ", fmt_fixed(t.wer(), 4), "\n");
  return out;
}

std::string render_hyps(const std::vector<std::pair<std::string, std::string>>& hyps) {
  std::string out;
  for (const auto& [id, transcript] : hyps) {
    out += cat(id, "\t", transcript.empty() ? "-" : transcript, "\n");
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_hyps(
    const std::string& text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  int lineno = 0;
  for (std::string_view line : util::split(text, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = util::split(line, '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      throw Error(cat(origin, ":", lineno, ": expected 'id\\ttranscript'"));
    }
    std::string transcript(fields[1]);
    if (transcript == "-") transcript.clear();
    out.emplace_back(std::string(fields[0]), std::move(transcript));
  }
  return out;
}

}  // namespace cjt::decode
