// util/kv_config.cc

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

#include "util/kv_config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "util/error.h"
#include "util/hash.h"
#include "util/strings.h"

namespace cjt::util {

namespace {

// Splits "section.key" into its parts; a bare key maps to section "".
std::pair<std::string, std::string> split_key(const std::string& key) {
  auto dot = key.find('.');
  if (dot == std::string::npos) return {"", key};
  return {key.substr(0, dot), key.substr(dot + 1)};
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  if (pos == std::string::npos) return line;
  return line.substr(0, pos);
}

}  // namespace

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(cat("cannot open config file: ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

KvConfig KvConfig::parse_text(const std::string& text, const std::string& origin) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw ConfigError(cat(origin, ":", lineno, ": malformed section header: ", s));
      }
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) {
        throw ConfigError(cat(origin, ":", lineno, ": empty section name"));
      }
      cfg.entries_[section];  // record even if the section stays empty
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(cat(origin, ":", lineno, ": expected key = value, got: ", s));
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(cat(origin, ":", lineno, ": empty key"));
    }
    cfg.entries_[section][key] = value;
  }
  return cfg;
}

const std::string* KvConfig::find(const std::string& key) const {
  auto [sec, k] = split_key(key);
  auto sit = entries_.find(sec);
  if (sit == entries_.end()) return nullptr;
  auto kit = sit->second.find(k);
  if (kit == sit->second.end()) return nullptr;
  return &kit->second;
}

bool KvConfig::has(const std::string& key) const { return find(key) != nullptr; }

const std::string& KvConfig::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigError(cat("missing config key: ", key));
  return *v;
}

std::string KvConfig::get_string(const std::string& key, const std::string& dflt) const {
  const std::string* v = find(key);
  return v ? *v : dflt;
}

int64_t KvConfig::get_int(const std::string& key) const {
  return parse_int(get_string(key), key);
}

int64_t KvConfig::get_int(const std::string& key, int64_t dflt) const {
  const std::string* v = find(key);
  return v ? parse_int(*v, key) : dflt;
}

double KvConfig::get_double(const std::string& key) const {
  return parse_double(get_string(key), key);
}

double KvConfig::get_double(const std::string& key, double dflt) const {
  const std::string* v = find(key);
  return v ? parse_double(*v, key) : dflt;
}

bool KvConfig::get_bool(const std::string& key) const {
  return parse_bool(get_string(key), key);
}

bool KvConfig::get_bool(const std::string& key, bool dflt) const {
  const std::string* v = find(key);
  return v ? parse_bool(*v, key) : dflt;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  auto [sec, k] = split_key(key);
  if (k.empty()) throw ConfigError(cat("empty key in set: ", key));
  entries_[sec][k] = value;
}

void KvConfig::set_int(const std::string& key, int64_t value) {
  set(key, cat(value));
}

void KvConfig::set_double(const std::string& key, double value) {
  // Round-trip precision; shortest form is not required, stability is.
  std::ostringstream os;
  os.precision(17);
  os << value;
  set(key, os.str());
}

void KvConfig::set_bool(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}

void KvConfig::merge_from(const KvConfig& other) {
  for (const auto& [sec, kv] : other.entries_) {
    for (const auto& [k, v] : kv) entries_[sec][k] = v;
  }
}

void KvConfig::apply_override(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(cat("override must look like section.key=value: ", assignment));
  }
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  if (key.empty()) throw ConfigError(cat("override has empty key: ", assignment));
  set(key, value);
}

std::string KvConfig::serialize() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [sec, kv] : entries_) {  // std::map iterates sorted
    if (kv.empty() && !sec.empty()) continue;
    if (!sec.empty()) {
      if (!first) os << "\n";
      os << "[" << sec << "]\n";
    }
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    first = false;
  }
  return os.str();
}

uint64_t KvConfig::hash() const { return fnv1a64(serialize()); }

uint64_t KvConfig::hash_sections(const std::vector<std::string>& sections) const {
  std::set<std::string> wanted(sections.begin(), sections.end());
  std::ostringstream os;
  for (const auto& [sec, kv] : entries_) {
    if (!wanted.count(sec)) continue;
    os << "[" << sec << "]\n";
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
  }
  return fnv1a64(os.str());
}

std::vector<std::string> KvConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [sec, kv] : entries_) {
    for (const auto& [k, v] : kv) {
      out.push_back(sec.empty() ? k : cat(sec, ".", k));
    }
  }
  return out;
}

}  // namespace cjt::util
