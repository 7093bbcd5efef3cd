// synthtask/manifest.cc

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

#include "synthtask/manifest.h"

#include <charconv>
#include <sstream>

#include "util/error.h"
#include "util/io.h"
#include "util/strings.h"

namespace cjt::synthtask {

using cjt::util::cat;

AudioRef AudioRef::none() { return AudioRef{}; }

AudioRef AudioRef::rendered(const std::string& profile, const std::string& condition,
                            uint64_t seed) {
  if (profile != "real" && profile != "tts") {
    throw Error(cat("audio ref: unknown profile ", profile));
  }
  if (condition != "clean" && condition != "other") {
    throw Error(cat("audio ref: unknown condition ", condition));
  }
  AudioRef r;
  r.kind = Kind::render;
  r.profile = profile;
  r.condition = condition;
  r.seed = seed;
  return r;
}

AudioRef AudioRef::from_file(const std::string& path) {
  AudioRef r;
  r.kind = Kind::file;
  r.path = path;
  return r;
}

std::string AudioRef::serialize() const {
  switch (kind) {
    case Kind::none:
      return "-";
    case Kind::render:
      return cat("render:", profile, ":", condition, ":", seed);
    case Kind::file:
      return cat("file:", path);
  }
  throw Error("audio ref: bad kind");
}

AudioRef AudioRef::parse(const std::string& text) {
  if (text == "-") return none();
  if (cjt::util::starts_with(text, "file:")) return from_file(text.substr(5));
  if (cjt::util::starts_with(text, "render:")) {
    auto parts = cjt::util::split(text.substr(7), ':');
    if (parts.size() != 3) throw Error(cat("audio ref: malformed ", text));
    uint64_t seed = 0;
    const std::string& s = parts[2];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(cat("audio ref: bad seed in ", text));
    }
    return rendered(parts[0], parts[1], seed);
  }
  throw Error(cat("audio ref: unknown form ", text));
}

namespace {

const std::string& or_dash(const std::string& s) {
  static const std::string dash = "-";
  return s.empty() ? dash : s;
}

std::string undash(const std::string& s) { return s == "-" ? "" : s; }

void check_field(const std::string& s, const char* what) {
  if (s.find('\t') != std::string::npos || s.find('\n') != std::string::npos) {
    throw Error(cat("manifest: ", what, " contains a tab or newline"));
  }
}

}  // namespace

std::string Manifest::serialize() const {
  std::ostringstream os;
  for (const ManifestRecord& r : records) {
    check_field(r.id, "id");
    check_field(r.transcript, "transcript");
    check_field(r.sealed, "sealed transcript");
    os << r.id << '\t' << r.audio.serialize() << '\t' << or_dash(r.transcript)
       << '\t' << r.provenance << '\t' << r.condition << '\t' << or_dash(r.sealed)
       << '\n';
  }
  return os.str();
}

Manifest Manifest::parse_text(const std::string& text, const std::string& origin) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = cjt::util::split(line, '\t');
    if (fields.size() != 6) {
      throw Error(cat(origin, ":", lineno, ": expected 6 tab-separated fields, got ",
                      fields.size()));
    }
    ManifestRecord r;
    r.id = fields[0];
    r.audio = AudioRef::parse(fields[1]);
    r.transcript = undash(fields[2]);
    r.provenance = fields[3];
    r.condition = fields[4];
    r.sealed = undash(fields[5]);
    if (r.provenance != "gold" && r.provenance != "unpaired-speech" &&
        r.provenance != "unpaired-text") {
      throw Error(cat(origin, ":", lineno, ": unknown provenance ", r.provenance));
    }
    if (r.provenance == "unpaired-speech" && !r.transcript.empty()) {
      throw Error(cat(origin, ":", lineno,
                      ": unpaired-speech record carries a visible transcript"));
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

void Manifest::save(const std::string& path) const {
  cjt::util::write_text_file(path, serialize());
}

Manifest Manifest::load(const std::string& path) {
  return parse_text(cjt::util::read_text_file(path), path);
}

cjt::numerics::Tensor<float> load_audio(const AudioRef& ref,
                                        const std::string& transcript,
                                        const Profiles& profiles, const Vocab& vocab,
                                        const std::string& root) {
  switch (ref.kind) {
    case AudioRef::Kind::none:
      throw Error("load_audio: record has no audio");
    case AudioRef::Kind::file: {
      const std::string full = root.empty() ? ref.path : cat(root, "/", ref.path);
      cjt::util::FeatureDump dump = cjt::util::read_feature_dump(full);
      std::vector<float> values(dump.data.begin(), dump.data.end());
      return cjt::numerics::Tensor<float>::from(
          {static_cast<int>(dump.frames), static_cast<int>(dump.dim)},
          std::move(values));
    }
    case AudioRef::Kind::render: {
      if (transcript.empty()) {
        throw Error("load_audio: render ref without a visible transcript");
      }
      const RenderProfile& prof =
          ref.profile == "real" ? profiles.real : profiles.tts;
      return render(vocab.encode(transcript), prof, ref.seed,
                    ref.condition == "other", vocab);
    }
  }
  throw Error("load_audio: bad audio ref kind");
}

}  // namespace cjt::synthtask
