// decode/wer.cc

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

#include "decode/wer.h"

#include <algorithm>

#include "util/error.h"

namespace cjt::decode {

WerResult wer(const std::vector<int>& ref, const std::vector<int>& hyp) {
  if (ref.empty()) throw Error("wer: empty reference");
  const size_t nr = ref.size(), nh = hyp.size();

  // dist[i][j]: edit distance between ref[0..i) and hyp[0..j).
  std::vector<std::vector<int>> dist(nr + 1, std::vector<int>(nh + 1, 0));
  for (size_t i = 0; i <= nr; ++i) dist[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= nh; ++j) dist[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= nr; ++i) {
    for (size_t j = 1; j <= nh; ++j) {
      const int sub = dist[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int del = dist[i - 1][j] + 1;
      const int ins = dist[i][j - 1] + 1;
      dist[i][j] = std::min(sub, std::min(del, ins));
    }
  }

  // Backtrace, preferring match, then sub, then del, then ins.
  Alignment a;
  size_t i = nr, j = nh;
  std::vector<EditOp> rev;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] &&
        dist[i][j] == dist[i - 1][j - 1]) {
      rev.push_back(EditOp::match);
      --i;
      --j;
    } else if (i > 0 && j > 0 && dist[i][j] == dist[i - 1][j - 1] + 1) {
      rev.push_back(EditOp::sub);
      --i;
      --j;
    } else if (i > 0 && dist[i][j] == dist[i - 1][j] + 1) {
      rev.push_back(EditOp::del);
      --i;
    } else {
      rev.push_back(EditOp::ins);
      --j;
    }
  }
  a.ops.assign(rev.rbegin(), rev.rend());
  for (EditOp op : a.ops) {
    switch (op) {
      case EditOp::match:
        ++a.matches;
        a.hyp_correct.push_back(1);
        break;
      case EditOp::sub:
        ++a.substitutions;
        a.hyp_correct.push_back(0);
        break;
      case EditOp::ins:
        ++a.insertions;
        a.hyp_correct.push_back(0);
        break;
      case EditOp::del:
        ++a.deletions;
        break;
    }
  }

  WerResult r;
  r.rate = static_cast<double>(a.distance()) / static_cast<double>(nr);
  r.alignment = std::move(a);
  return r;
}

std::string alignment_string(const Alignment& a) {
  std::string s;
  s.reserve(a.ops.size());
  for (EditOp op : a.ops) {
    switch (op) {
      case EditOp::match: s.push_back('='); break;
      case EditOp::sub: s.push_back('S'); break;
      case EditOp::del: s.push_back('D'); break;
      case EditOp::ins: s.push_back('I'); break;
    }
  }
  return s;
}

}  // namespace cjt::decode
