// tests/util_test.cc

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

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "test_support.h"
#include "util/error.h"
#include "util/io.h"
#include "util/kv_config.h"
#include "util/rng.h"

using cjt::tests::TempDir;
using cjt::util::derive_seed;
using cjt::util::KvConfig;
using cjt::util::Rng;

TEST_CASE("identical seeds give identical streams, different seeds diverge") {
  Rng a(42), b(42), c(43);
  bool diverged = false;
  for (int i = 0; i < 64; ++i) {
    uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) diverged = true;
  }
  CHECK(diverged);
}

TEST_CASE("uniform stays in [0,1) and uniform_int respects inclusive bounds") {
  Rng rng(7);
  std::set<int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    int64_t v = rng.uniform_int(-3, 5);
    CHECK(v >= -3);
    CHECK(v <= 5);
    seen.insert(v);
  }
  CHECK(seen.size() == 9);  // all values of a 9-wide range show up in 2000 draws
}

TEST_CASE("bernoulli frequency tracks p") {
  Rng rng(8);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
  double rate = static_cast<double>(hits) / n;
  CHECK(rate > 0.28);
  CHECK(rate < 0.32);
}

TEST_CASE("derive_seed separates names and indices") {
  uint64_t master = 1234;
  CHECK(derive_seed(master, "dropout") == derive_seed(master, "dropout"));
  CHECK(derive_seed(master, "dropout") != derive_seed(master, "specaug"));
  CHECK(derive_seed(master, "batch", 0) != derive_seed(master, "batch", 1));
  CHECK(derive_seed(master, "x") != derive_seed(master + 1, "x"));

  // Streams derived for different names must not be trivially correlated:
  // compare the first few draws.
  Rng a(derive_seed(master, "one"));
  Rng b(derive_seed(master, "two"));
  int equal = 0;
  for (int i = 0; i < 16; ++i) equal += (a.next_u64() == b.next_u64()) ? 1 : 0;
  CHECK(equal == 0);
}

TEST_CASE("kv config parses sections, comments and types") {
  const char* text =
      "top = 1\n"
      "[train]\n"
      "updates = 300   # comment\n"
      "lr = 5e-4\n"
      "flag = true\n"
      "name = alternating\n"
      "[data]\n"
      "paired = 40\n";
  KvConfig cfg = KvConfig::parse_text(text, "inline");
  CHECK(cfg.get_int("top") == 1);
  CHECK(cfg.get_int("train.updates") == 300);
  CHECK(cfg.get_double("train.lr") == doctest::Approx(5e-4));
  CHECK(cfg.get_bool("train.flag"));
  CHECK(cfg.get_string("train.name") == "alternating");
  CHECK(cfg.get_int("data.paired") == 40);
  CHECK(cfg.has("train.updates"));
  CHECK(!cfg.has("train.missing"));
  CHECK(cfg.get_int("train.missing", 9) == 9);
  CHECK_THROWS_AS(cfg.get_int("train.missing"), cjt::ConfigError);
  CHECK_THROWS_AS(cfg.get_int("train.name"), cjt::ConfigError);
}

TEST_CASE("kv config serialization is canonical and round-trips") {
  KvConfig a;
  a.set("zeta.k", "1");
  a.set("alpha.b", "x");
  a.set("alpha.a", "y");
  KvConfig b;
  b.set("alpha.a", "y");
  b.set("zeta.k", "1");
  b.set("alpha.b", "x");
  CHECK(a.serialize() == b.serialize());
  CHECK(a.hash() == b.hash());

  KvConfig back = KvConfig::parse_text(a.serialize(), "round-trip");
  CHECK(back.serialize() == a.serialize());
}

TEST_CASE("section hashes ignore unrelated sections") {
  KvConfig cfg;
  cfg.set("train.updates", "100");
  cfg.set("decode.beam", "8");
  uint64_t h = cfg.hash_sections({"train"});
  cfg.set("decode.beam", "20");
  CHECK(cfg.hash_sections({"train"}) == h);
  cfg.set("train.updates", "200");
  CHECK(cfg.hash_sections({"train"}) != h);
  // Order and duplicates of the section list do not matter.
  CHECK(cfg.hash_sections({"decode", "train", "decode"}) ==
        cfg.hash_sections({"train", "decode"}));
}

TEST_CASE("overrides and merges apply on top") {
  KvConfig cfg;
  cfg.set("train.updates", "100");
  cfg.apply_override("train.updates=250");
  CHECK(cfg.get_int("train.updates") == 250);
  cfg.apply_override("fresh.key=hello");
  CHECK(cfg.get_string("fresh.key") == "hello");
  CHECK_THROWS_AS(cfg.apply_override("no-equals-sign"), cjt::ConfigError);

  KvConfig over;
  over.set("train.updates", "999");
  over.set("train.extra", "1");
  cfg.merge_from(over);
  CHECK(cfg.get_int("train.updates") == 999);
  CHECK(cfg.get_int("train.extra") == 1);
}

TEST_CASE("feature dumps round-trip exactly") {
  TempDir dir("io");
  cjt::util::FeatureDump dump;
  dump.frames = 3;
  dump.dim = 4;
  Rng rng(5);
  for (int i = 0; i < 12; ++i) dump.data.push_back(static_cast<float>(rng.uniform() - 0.5));
  std::string path = dir.path() + "/utt.feats";
  cjt::util::write_feature_dump(path, dump);
  cjt::util::FeatureDump back = cjt::util::read_feature_dump(path);
  CHECK(back.frames == dump.frames);
  CHECK(back.dim == dump.dim);
  REQUIRE(back.data.size() == dump.data.size());
  for (size_t i = 0; i < dump.data.size(); ++i) CHECK(back.data[i] == dump.data[i]);
}

TEST_CASE("reading a corrupt feature dump fails loudly") {
  TempDir dir("io-bad");
  std::string path = dir.path() + "/bad.feats";
  cjt::util::write_text_file(path, "not a feature file");
  CHECK_THROWS_AS(cjt::util::read_feature_dump(path), cjt::Error);
}

TEST_CASE("text files write atomically and read back") {
  TempDir dir("txt");
  std::string path = dir.path() + "/a.txt";
  cjt::util::write_text_file(path, "line1\nline2\n");
  CHECK(cjt::util::read_text_file(path) == "line1\nline2\n");
  auto lines = cjt::util::read_lines(path);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "line1");
  CHECK(lines[1] == "line2");
  CHECK(cjt::util::file_exists(path));
  cjt::util::remove_file(path);
  CHECK(!cjt::util::file_exists(path));
  cjt::util::remove_file(path);  // second removal is a no-op
}
