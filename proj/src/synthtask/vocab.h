// synthtask/vocab.h

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

#ifndef CJT_SYNTHTASK_VOCAB_H_
#define CJT_SYNTHTASK_VOCAB_H_

#include <string>
#include <vector>

namespace cjt::synthtask {

// Reserved special token IDs. Everything downstream (masking, decoding,
// manifests) assumes these exact values.
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kNumSpecials = 4;

// Word-level toy vocabulary: 4 specials followed by a fixed list of content
// words. Content IDs start at kNumSpecials.
class Vocab {
 public:
  // The standard 44-token vocabulary (4 specials + 40 content words).
  static const Vocab& standard();

  int size() const { return static_cast<int>(words_.size()); }
  int content_count() const { return size() - kNumSpecials; }
  int first_content_id() const { return kNumSpecials; }

  const std::string& word(int id) const;
  // ID of a word, kUnk if not in the vocabulary.
  int id_or_unk(const std::string& word) const;
  bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }

  // Space-separated text <-> content token IDs. encode maps unknown words to
  // kUnk; decode renders any ID via word().
  std::vector<int> encode(const std::string& text) const;
  std::string decode(const std::vector<int>& ids) const;

 private:
  explicit Vocab(std::vector<std::string> words) : words_(std::move(words)) {}
  std::vector<std::string> words_;
};

}  // namespace cjt::synthtask

#endif  // CJT_SYNTHTASK_VOCAB_H_
