// synthtask/corpus.cc

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

#include "synthtask/corpus.h"

#include <cstdio>
#include <set>

#include "util/error.h"
#include "util/io.h"
#include "util/strings.h"

namespace cjt::synthtask {

using cjt::util::cat;

void CorpusSizes::validate() const {
  if (paired_n < 1 || unpaired_speech_n < 1 || unpaired_text_n < 1 || eval_n < 1) {
    throw ConfigError("corpus: all set sizes must be positive");
  }
  if (min_len < 1 || min_len > max_len) throw ConfigError("corpus: bad length range");
}

CorpusSizes CorpusSizes::from_kv(const cjt::util::KvConfig& cfg) {
  CorpusSizes s;
  s.paired_n = static_cast<int>(cfg.get_int("corpus.paired_n", s.paired_n));
  s.unpaired_speech_n =
      static_cast<int>(cfg.get_int("corpus.unpaired_speech_n", s.unpaired_speech_n));
  s.unpaired_text_n =
      static_cast<int>(cfg.get_int("corpus.unpaired_text_n", s.unpaired_text_n));
  s.eval_n = static_cast<int>(cfg.get_int("corpus.eval_n", s.eval_n));
  s.min_len = static_cast<int>(cfg.get_int("corpus.min_len", s.min_len));
  s.max_len = static_cast<int>(cfg.get_int("corpus.max_len", s.max_len));
  s.validate();
  return s;
}

void CorpusSizes::to_kv(cjt::util::KvConfig& cfg) const {
  cfg.set_int("corpus.paired_n", paired_n);
  cfg.set_int("corpus.unpaired_speech_n", unpaired_speech_n);
  cfg.set_int("corpus.unpaired_text_n", unpaired_text_n);
  cfg.set_int("corpus.eval_n", eval_n);
  cfg.set_int("corpus.min_len", min_len);
  cfg.set_int("corpus.max_len", max_len);
}

Grammar::Grammar(const Vocab& vocab, cjt::util::Rng& rng, int successors)
    : first_content_(vocab.first_content_id()) {
  const int content = vocab.content_count();
  if (successors < 2 || successors > content) {
    throw Error(cat("grammar: successors ", successors, " for ", content, " words"));
  }
  table_.resize(static_cast<size_t>(content) + 1);
  std::vector<int> ids(static_cast<size_t>(content));
  for (int i = 0; i < content; ++i) ids[static_cast<size_t>(i)] = first_content_ + i;
  for (auto& row : table_) {
    // Fisher-Yates prefix picks `successors` distinct follow-up words.
    std::vector<int> pool = ids;
    for (int i = 0; i < successors; ++i) {
      const int j = static_cast<int>(
          rng.uniform_int(i, static_cast<int64_t>(pool.size()) - 1));
      std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    double total = 0.0;
    std::vector<double> weights(static_cast<size_t>(successors));
    for (int i = 0; i < successors; ++i) {
      weights[static_cast<size_t>(i)] = 0.1 + rng.uniform();
      total += weights[static_cast<size_t>(i)];
    }
    double cum = 0.0;
    row.reserve(static_cast<size_t>(successors));
    for (int i = 0; i < successors; ++i) {
      cum += weights[static_cast<size_t>(i)] / total;
      row.emplace_back(pool[static_cast<size_t>(i)], cum);
    }
    row.back().second = 1.0;  // close the rounding gap
  }
}

std::vector<int> Grammar::sample(int len, cjt::util::Rng& rng) const {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(len));
  size_t ctx = table_.size() - 1;  // start state
  for (int t = 0; t < len; ++t) {
    const double u = rng.uniform();
    const auto& row = table_[ctx];
    int tok = row.back().first;
    for (const auto& [id, cum] : row) {
      if (u < cum) {
        tok = id;
        break;
      }
    }
    out.push_back(tok);
    ctx = static_cast<size_t>(tok - first_content_);
  }
  return out;
}

namespace {

class SentencePool {
 public:
  SentencePool(const Grammar& grammar, const CorpusSizes& sizes, const Vocab& vocab,
               cjt::util::Rng& rng)
      : grammar_(grammar), sizes_(sizes), vocab_(vocab), rng_(rng) {}

  // Fresh sentence not seen before, as text. Length is redrawn per attempt,
  // so a crowded short-sentence space shifts mass to longer sentences
  // instead of starving.
  std::string fresh() {
    for (int attempt = 0; attempt < 2000; ++attempt) {
      const int len = static_cast<int>(rng_.uniform_int(sizes_.min_len, sizes_.max_len));
      std::string text = vocab_.decode(grammar_.sample(len, rng_));
      if (used_.insert(text).second) return text;
    }
    throw ConfigError(
        "corpus: vocabulary too small for the requested disjoint sentence sets");
  }

 private:
  const Grammar& grammar_;
  const CorpusSizes& sizes_;
  const Vocab& vocab_;
  cjt::util::Rng& rng_;
  std::set<std::string> used_;
};

std::string record_id(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%06d", prefix, i);
  return buf;
}

}  // namespace

Corpus generate_corpus(const CorpusSizes& sizes, const Vocab& vocab, uint64_t seed) {
  sizes.validate();
  cjt::util::RngPool pool(seed);
  Grammar grammar(vocab, pool.stream("corpus.grammar"));
  SentencePool sentences(grammar, sizes, vocab, pool.stream("corpus.sentences"));
  cjt::util::Rng& seeds = pool.stream("corpus.render_seeds");

  Corpus c;
  for (int i = 0; i < sizes.paired_n; ++i) {
    ManifestRecord r;
    r.id = record_id("gold", i);
    r.transcript = sentences.fresh();
    r.audio = AudioRef::rendered("real", "clean", seeds.next_u64());
    r.provenance = "gold";
    r.condition = "clean";
    c.gold.records.push_back(std::move(r));
  }
  for (int i = 0; i < sizes.unpaired_speech_n; ++i) {
    ManifestRecord r;
    r.id = record_id("ups", i);
    r.sealed = sentences.fresh();
    r.audio = AudioRef::rendered("real", "clean", seeds.next_u64());
    r.provenance = "unpaired-speech";
    r.condition = "clean";
    c.unpaired_speech.records.push_back(std::move(r));
  }
  for (int i = 0; i < sizes.unpaired_text_n; ++i) {
    ManifestRecord r;
    r.id = record_id("upt", i);
    r.transcript = sentences.fresh();
    r.audio = AudioRef::none();
    r.provenance = "unpaired-text";
    r.condition = "clean";
    c.unpaired_text.records.push_back(std::move(r));
  }
  struct EvalSet {
    Manifest* manifest;
    const char* prefix;
    const char* condition;
  };
  const EvalSet eval_sets[] = {
      {&c.dev_clean, "dev-clean", "clean"},
      {&c.dev_other, "dev-other", "other"},
      {&c.test_clean, "test-clean", "clean"},
      {&c.test_other, "test-other", "other"},
  };
  for (const EvalSet& s : eval_sets) {
    for (int i = 0; i < sizes.eval_n; ++i) {
      ManifestRecord r;
      r.id = record_id(s.prefix, i);
      r.transcript = sentences.fresh();
      r.audio = AudioRef::rendered("real", s.condition, seeds.next_u64());
      r.provenance = "gold";
      r.condition = s.condition;
      s.manifest->records.push_back(std::move(r));
    }
  }
  return c;
}

void write_corpus(const Corpus& corpus, const Profiles& profiles, const Vocab& vocab,
                  const std::string& root) {
  cjt::util::ensure_dir(cat(root, "/manifests"));
  cjt::util::ensure_dir(cat(root, "/features/unpaired"));

  // Unpaired speech is the one set whose audio must be materialized: the
  // render recipe needs the withheld transcript, so only this generator may
  // expand it. Everything after this point reads feature bytes.
  Manifest unpaired = corpus.unpaired_speech;
  for (ManifestRecord& r : unpaired.records) {
    if (r.audio.kind != AudioRef::Kind::render) {
      throw Error(cat("write_corpus: unpaired record ", r.id, " already materialized"));
    }
    const auto feats = render(vocab.encode(r.sealed), profiles.real, r.audio.seed,
                              r.condition == "other", vocab);
    cjt::util::FeatureDump dump;
    dump.frames = static_cast<uint32_t>(feats.rows());
    dump.dim = static_cast<uint32_t>(feats.cols());
    dump.data.assign(feats.data(), feats.data() + feats.numel());
    const std::string rel = cat("features/unpaired/", r.id, ".fea");
    cjt::util::write_feature_dump(cat(root, "/", rel), dump);
    r.audio = AudioRef::from_file(rel);
  }

  corpus.gold.save(cat(root, "/manifests/gold.tsv"));
  unpaired.save(cat(root, "/manifests/unpaired_speech.tsv"));
  corpus.unpaired_text.save(cat(root, "/manifests/unpaired_text.tsv"));
  corpus.dev_clean.save(cat(root, "/manifests/dev-clean.tsv"));
  corpus.dev_other.save(cat(root, "/manifests/dev-other.tsv"));
  corpus.test_clean.save(cat(root, "/manifests/test-clean.tsv"));
  corpus.test_other.save(cat(root, "/manifests/test-other.tsv"));
}

}  // namespace cjt::synthtask
