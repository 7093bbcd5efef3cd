// synthtask/manifest.h

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

#ifndef CJT_SYNTHTASK_MANIFEST_H_
#define CJT_SYNTHTASK_MANIFEST_H_

#include <cstdint>
#include <string>
#include <vector>

#include "numerics/tensor.h"
#include "synthtask/render.h"
#include "synthtask/vocab.h"

namespace cjt::synthtask {

// Where a record's audio comes from: nothing (text-only records), a
// deterministic render recipe, or a materialized feature-dump file relative
// to the experiment root.
struct AudioRef {
  enum class Kind { none, render, file };
  Kind kind = Kind::none;
  std::string profile;    // "real" | "tts"            (render only)
  std::string condition;  // "clean" | "other"         (render only)
  uint64_t seed = 0;      //                           (render only)
  std::string path;       //                           (file only)

  static AudioRef none();
  static AudioRef rendered(const std::string& profile, const std::string& condition,
                           uint64_t seed);
  static AudioRef from_file(const std::string& path);
  std::string serialize() const;
  static AudioRef parse(const std::string& text);
  bool operator==(const AudioRef& o) const = default;
};

// One utterance. `transcript` is the training-visible text ("" if withheld);
// `sealed` holds the withheld reference of unpaired-speech records and must
// only ever be read by scoring and diagnostics, never by training or
// pseudo-labeling.
struct ManifestRecord {
  std::string id;
  AudioRef audio;
  std::string transcript;
  std::string provenance;  // gold | unpaired-speech | unpaired-text
  std::string condition;   // clean | other
  std::string sealed;

  bool operator==(const ManifestRecord& o) const = default;
};

// Line-delimited, tab-separated: id, audio, transcript, provenance,
// condition, sealed. Empty strings are stored as "-". Round-trips
// bit-exactly.
struct Manifest {
  std::vector<ManifestRecord> records;

  std::string serialize() const;
  static Manifest parse_text(const std::string& text, const std::string& origin);
  void save(const std::string& path) const;
  static Manifest load(const std::string& path);
  bool operator==(const Manifest& o) const = default;
};

// Materializes the audio a record points at. `root` resolves file refs;
// render refs need the record's visible transcript. Reading a file ref never
// touches any transcript field, which is what keeps sealed references out of
// the training path.
cjt::numerics::Tensor<float> load_audio(const AudioRef& ref,
                                        const std::string& transcript,
                                        const Profiles& profiles,
                                        const Vocab& vocab,
                                        const std::string& root);

}  // namespace cjt::synthtask

#endif  // CJT_SYNTHTASK_MANIFEST_H_
