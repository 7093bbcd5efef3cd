// pipeline/compare.cc

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

#include "pipeline/compare.h"

#include <sstream>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::pipeline {

RunSummary parse_summary(const std::string& text, const std::string& label,
                         const std::string& origin) {
  RunSummary out;
  out.label = label;
  for (const std::string& line : cjt::util::split(text, '\n')) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = cjt::util::split(line, '\t');
    if (fields.size() != 4)
      throw ConfigError(origin + ": expected 4 fields (set, mode, utterances, wer), got " +
                        std::to_string(fields.size()));
    out.wer[fields[0] + ":" + fields[1]] =
        cjt::util::parse_double(fields[3], origin + " wer column");
  }
  if (out.wer.empty()) throw ConfigError(origin + ": no score rows");
  return out;
}

std::string render_compare(const std::vector<RunSummary>& runs) {
  if (runs.empty()) throw ConfigError("nothing to compare");
  const std::map<std::string, double>& first = runs.front().wer;
  for (const RunSummary& r : runs) {
    if (r.wer.size() != first.size())
      throw ConfigError("run '" + r.label + "' covers different eval sets than '" +
                        runs.front().label + "'");
    for (const auto& [cell, _] : first)
      if (r.wer.find(cell) == r.wer.end())
        throw ConfigError("run '" + r.label + "' is missing eval cell '" + cell + "'");
  }

  std::ostringstream os;
  os << "# method";
  for (const auto& [cell, _] : first) os << '\t' << cell;
  os << '\n';
  for (const RunSummary& r : runs) {
    os << r.label;
    for (const auto& [cell, _] : first) os << '\t' << cjt::util::fmt_fixed(r.wer.at(cell), 4);
    os << '\n';
  }
  return os.str();
}

}  // namespace cjt::pipeline
