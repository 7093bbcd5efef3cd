// util/io.h

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

#ifndef CJT_UTIL_IO_H_
#define CJT_UTIL_IO_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cjt::util {

std::string read_text_file(const std::string& path);
// Writes via a temp file + rename so readers never observe a partial file.
void write_text_file(const std::string& path, const std::string& content);

std::vector<std::string> read_lines(const std::string& path);

bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);   // mkdir -p
void remove_file(const std::string& path);  // no-op if absent

// Little-endian binary primitives for checkpoint and feature files. The
// serialized layout is the in-memory little-endian layout; this code targets
// little-endian hosts only and the readers check magic numbers, so a
// byte-order mismatch fails loudly rather than silently.
void put_u32(std::ostream& os, uint32_t v);
void put_u64(std::ostream& os, uint64_t v);
void put_f32(std::ostream& os, float v);
void put_f32_array(std::ostream& os, const float* data, size_t n);
void put_string(std::ostream& os, const std::string& s);  // u32 length + bytes

uint32_t get_u32(std::istream& is, const std::string& what);
uint64_t get_u64(std::istream& is, const std::string& what);
float get_f32(std::istream& is, const std::string& what);
void get_f32_array(std::istream& is, float* data, size_t n, const std::string& what);
std::string get_string(std::istream& is, const std::string& what);

// Feature dump: one utterance's filterbank-like features in a flat binary
// file. Layout: u32 magic, u32 frames, u32 dim, then frames*dim f32 values
// row-major. This is the only on-disk form the training and pseudo-labeling
// paths are allowed to read for unpaired speech, which keeps sealed
// transcripts provably out of reach.
struct FeatureDump {
  uint32_t frames = 0;
  uint32_t dim = 0;
  std::vector<float> data;  // frames * dim, row-major
};

void write_feature_dump(const std::string& path, const FeatureDump& dump);
FeatureDump read_feature_dump(const std::string& path);

}  // namespace cjt::util

#endif  // CJT_UTIL_IO_H_
