// pairgen/pair_set.cc

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

#include "pairgen/pair_set.h"

#include <map>

#include "decode/wer.h"
#include "util/error.h"
#include "util/io.h"
#include "util/strings.h"

namespace cjt::pairgen {

using cjt::synthtask::Manifest;
using cjt::synthtask::Vocab;
using cjt::util::cat;
using cjt::util::fmt_fixed;

namespace {

bool known_provenance(const std::string& p) {
  return p == kProvSpeechPseL || p == kProvSynAText || p == kProvGold;
}

void check_field(const std::string& field, const std::string& what,
                 const std::string& origin, int lineno) {
  if (field.find('\t') != std::string::npos ||
      field.find('\n') != std::string::npos) {
    throw Error(cat(origin, ":", lineno, ": ", what, " contains a separator"));
  }
}

}  // namespace

std::string PairSet::serialize(const Vocab& vocab) const {
  std::string out;
  for (const PairRecord& r : records) {
    if (r.id.empty()) throw Error("pair set: record without id");
    if (!known_provenance(r.provenance)) {
      throw Error(cat("pair set: unknown provenance '", r.provenance, "'"));
    }
    if (!r.confidences.empty() && r.confidences.size() != r.target.size()) {
      throw Error(cat("pair set: record ", r.id, " has ", r.confidences.size(),
                      " confidences for ", r.target.size(), " target tokens"));
    }
    std::string target = vocab.decode(r.target);
    // Targets must survive the word round trip exactly; anything else means
    // a special token leaked into a target.
    if (vocab.encode(target) != r.target) {
      throw Error(cat("pair set: record ", r.id, " target does not round-trip"));
    }
    std::string conf;
    if (r.confidences.empty()) {
      conf = "-";
    } else {
      for (size_t i = 0; i < r.confidences.size(); ++i) {
        const double p = r.confidences[i];
        if (p < 0.0 || p > 1.0) {
          throw Error(cat("pair set: record ", r.id, " confidence ", p,
                          " outside [0,1]"));
        }
        if (i > 0) conf.push_back(',');
        conf += fmt_fixed(p, 6);
      }
    }
    out += cat(r.id, "\t", r.audio.serialize(), "\t",
               target.empty() ? "-" : target, "\t", r.provenance, "\t", conf,
               "\n");
  }
  return out;
}

PairSet PairSet::parse_text(const std::string& text, const Vocab& vocab,
                            const std::string& origin) {
  PairSet set;
  int lineno = 0;
  for (const std::string& line : util::split(text, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = util::split(line, '\t');
    if (fields.size() != 5) {
      throw Error(cat(origin, ":", lineno, ": expected 5 tab-separated fields, got ",
                      fields.size()));
    }
    PairRecord r;
    r.id = fields[0];
    check_field(r.id, "id", origin, lineno);
    if (r.id.empty() || r.id == "-") {
      throw Error(cat(origin, ":", lineno, ": missing id"));
    }
    r.audio = synthtask::AudioRef::parse(fields[1]);
    if (fields[2] != "-") r.target = vocab.encode(fields[2]);
    r.provenance = fields[3];
    if (!known_provenance(r.provenance)) {
      throw Error(cat(origin, ":", lineno, ": unknown provenance '", r.provenance, "'"));
    }
    if (fields[4] != "-") {
      for (const std::string& tok : util::split(fields[4], ',')) {
        const double p = util::parse_double(tok, cat(origin, ":", lineno, ": confidence"));
        if (p < 0.0 || p > 1.0) {
          throw Error(cat(origin, ":", lineno, ": confidence ", tok, " outside [0,1]"));
        }
        r.confidences.push_back(p);
      }
      if (r.confidences.size() != r.target.size()) {
        throw Error(cat(origin, ":", lineno, ": ", r.confidences.size(),
                        " confidences for ", r.target.size(), " target tokens"));
      }
    }
    set.records.push_back(std::move(r));
  }
  return set;
}

void PairSet::save(const std::string& path, const Vocab& vocab) const {
  util::write_text_file(path, serialize(vocab));
}

PairSet PairSet::load(const std::string& path, const Vocab& vocab) {
  return parse_text(util::read_text_file(path), vocab, path);
}

PairSetStats pair_set_stats(const PairSet& pairs, const Manifest& refs,
                            const Vocab& vocab) {
  std::map<std::string, const synthtask::ManifestRecord*> by_id;
  for (const synthtask::ManifestRecord& r : refs.records) by_id[r.id] = &r;

  PairSetStats st;
  long long err = 0, ref_tokens = 0;
  double conf_sum = 0.0;
  long long conf_n = 0;
  for (const PairRecord& p : pairs.records) {
    st.count += 1;
    if (!p.confidences.empty()) {
      st.scored += 1;
      for (double c : p.confidences) conf_sum += c;
      conf_n += static_cast<long long>(p.confidences.size());
    }
    auto it = by_id.find(p.id);
    if (it == by_id.end()) continue;
    const synthtask::ManifestRecord& ref = *it->second;
    const std::string& ref_text =
        ref.sealed.empty() ? ref.transcript : ref.sealed;
    if (ref_text.empty()) continue;
    const std::vector<int> ref_ids = vocab.encode(ref_text);
    const decode::WerResult w = decode::wer(ref_ids, p.target);
    err += w.alignment.distance();
    ref_tokens += static_cast<long long>(ref_ids.size());
  }
  st.wer = ref_tokens > 0 ? static_cast<double>(err) / static_cast<double>(ref_tokens) : 0.0;
  st.mean_confidence = conf_n > 0 ? conf_sum / static_cast<double>(conf_n) : 0.0;
  return st;
}

}  // namespace cjt::pairgen
