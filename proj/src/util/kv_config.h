// util/kv_config.h

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

#ifndef CJT_UTIL_KV_CONFIG_H_
#define CJT_UTIL_KV_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cjt::util {

// Sectioned key=value configuration. Text format:
//
//   [section]
//   key = value   # trailing comment
//
// Keys are addressed as "section.key". Keys before any [section] line live in
// the "" section and are addressed bare. Unknown keys are kept verbatim so a
// config can round-trip. All typed getters throw ConfigError on a missing key
// (unless a default overload is used) or an unparsable value.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;

  const std::string& get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t dflt) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double dflt) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool dflt) const;

  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, int64_t value);
  void set_double(const std::string& key, double value);
  void set_bool(const std::string& key, bool value);

  // Applies every entry of `other` on top of this config.
  void merge_from(const KvConfig& other);

  // Applies "section.key=value" override strings (CLI --set style).
  void apply_override(const std::string& assignment);

  // Canonical text: sections sorted, keys sorted inside each section, exactly
  // "key = value" lines. Two configs with equal entries serialize to equal
  // bytes, so hashes of the serialization are stable.
  std::string serialize() const;

  // Hash of the canonical serialization of the whole config.
  uint64_t hash() const;

  // Hash restricted to the given sections (sorted, deduplicated internally).
  // Stage completion stamps use this so editing an unrelated section does not
  // invalidate a finished stage.
  uint64_t hash_sections(const std::vector<std::string>& sections) const;

  std::vector<std::string> keys() const;

 private:
  const std::string* find(const std::string& key) const;
  // section -> key -> value
  std::map<std::string, std::map<std::string, std::string>> entries_;
};

}  // namespace cjt::util

#endif  // CJT_UTIL_KV_CONFIG_H_
