// util/io.cc

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

#include "util/io.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "util/error.h"
#include "util/strings.h"

namespace cjt::util {

namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(cat("cannot open file for reading: ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(cat("cannot open file for writing: ", tmp));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(cat("short write to: ", tmp));
  }
  fs::rename(tmp, path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool file_exists(const std::string& path) { return fs::exists(path); }

void ensure_dir(const std::string& path) { fs::create_directories(path); }

void remove_file(const std::string& path) {
  std::error_code ec;
  fs::remove(path, ec);
}

void put_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u64(std::ostream& os, uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f32(std::ostream& os, float v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f32_array(std::ostream& os, const float* data, size_t n) {
  os.write(reinterpret_cast<const char*>(data),
           static_cast<std::streamsize>(n * sizeof(float)));
}

void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

namespace {
void read_exact(std::istream& is, char* out, size_t n, const std::string& what) {
  is.read(out, static_cast<std::streamsize>(n));
  if (static_cast<size_t>(is.gcount()) != n) {
    throw Error(cat("truncated read while loading ", what));
  }
}
}  // namespace

uint32_t get_u32(std::istream& is, const std::string& what) {
  uint32_t v;
  read_exact(is, reinterpret_cast<char*>(&v), sizeof v, what);
  return v;
}

uint64_t get_u64(std::istream& is, const std::string& what) {
  uint64_t v;
  read_exact(is, reinterpret_cast<char*>(&v), sizeof v, what);
  return v;
}

float get_f32(std::istream& is, const std::string& what) {
  float v;
  read_exact(is, reinterpret_cast<char*>(&v), sizeof v, what);
  return v;
}

void get_f32_array(std::istream& is, float* data, size_t n, const std::string& what) {
  read_exact(is, reinterpret_cast<char*>(data), n * sizeof(float), what);
}

std::string get_string(std::istream& is, const std::string& what) {
  uint32_t len = get_u32(is, what);
  std::string s(len, '\0');
  if (len > 0) read_exact(is, s.data(), len, what);
  return s;
}

namespace {
constexpr uint32_t kFeatureMagic = 0x46454131;  // "FEA1"
}

void write_feature_dump(const std::string& path, const FeatureDump& dump) {
  if (dump.data.size() != static_cast<size_t>(dump.frames) * dump.dim) {
    throw Error(cat("feature dump size mismatch for ", path, ": ",
                    dump.data.size(), " values vs ", dump.frames, "x", dump.dim));
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(cat("cannot open feature dump for writing: ", tmp));
    put_u32(out, kFeatureMagic);
    put_u32(out, dump.frames);
    put_u32(out, dump.dim);
    put_f32_array(out, dump.data.data(), dump.data.size());
    if (!out) throw Error(cat("short write to feature dump: ", tmp));
  }
  fs::rename(tmp, path);
}

FeatureDump read_feature_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(cat("cannot open feature dump: ", path));
  if (get_u32(in, path) != kFeatureMagic) {
    throw Error(cat("bad feature dump magic in ", path));
  }
  FeatureDump dump;
  dump.frames = get_u32(in, path);
  dump.dim = get_u32(in, path);
  dump.data.resize(static_cast<size_t>(dump.frames) * dump.dim);
  get_f32_array(in, dump.data.data(), dump.data.size(), path);
  return dump;
}

}  // namespace cjt::util
