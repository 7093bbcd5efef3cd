// synthtask/vocab.cc

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

#include "synthtask/vocab.h"

#include "util/error.h"
#include "util/strings.h"

namespace cjt::synthtask {

const Vocab& Vocab::standard() {
  static const Vocab vocab({
      "<pad>", "<bos>", "<eos>", "<unk>",
      "alfa", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
      "hotel", "india", "juliett", "kilo", "lima", "mike", "november",
      "oscar", "papa", "quebec", "romeo", "sierra", "tango", "uniform",
      "victor", "whiskey", "xray", "yankee", "zulu",
      "zero", "one", "two", "three", "four", "five", "six", "seven",
      "eight", "nine",
      "north", "south", "east", "west",
  });
  return vocab;
}

const std::string& Vocab::word(int id) const {
  if (id < 0 || id >= size()) {
    throw Error(cjt::util::cat("vocab: id ", id, " out of range [0,", size(), ")"));
  }
  return words_[static_cast<size_t>(id)];
}

int Vocab::id_or_unk(const std::string& w) const {
  for (int i = 0; i < size(); ++i) {
    if (words_[static_cast<size_t>(i)] == w) return i;
  }
  return kUnk;
}

std::vector<int> Vocab::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const std::string& w : cjt::util::split(text, ' ')) {
    if (w.empty()) continue;
    ids.push_back(id_or_unk(w));
  }
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += word(ids[i]);
  }
  return out;
}

}  // namespace cjt::synthtask
