// util/strings.h

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

#ifndef CJT_UTIL_STRINGS_H_
#define CJT_UTIL_STRINGS_H_

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cjt::util {

// Concatenates the stream representations of all arguments.
template <typename... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

// Strict numeric parsing; throws ConfigError with `context` on failure.
int64_t parse_int(std::string_view s, std::string_view context);
double parse_double(std::string_view s, std::string_view context);
bool parse_bool(std::string_view s, std::string_view context);

// Fixed-format floats for reports and logs (deterministic byte output).
std::string fmt_fixed(double v, int decimals);

}  // namespace cjt::util

#endif  // CJT_UTIL_STRINGS_H_
