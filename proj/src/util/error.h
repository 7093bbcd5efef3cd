// util/error.h

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

#ifndef CJT_UTIL_ERROR_H_
#define CJT_UTIL_ERROR_H_

#include <stdexcept>
#include <string>

namespace cjt {

// Base for everything thrown by this project. The CLI maps subclasses to
// exit codes: ConfigError -> 2, DependencyError -> 3, NumericalFault -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad shapes fed to a tensor op; message names the op and the shapes.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Unparseable or inconsistent configuration / input files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A pipeline stage was requested before the stages it depends on ran.
class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf detected in a loss, activation or gradient.
class NumericalFault : public Error {
 public:
  explicit NumericalFault(const std::string& msg) : Error(msg) {}
};

}  // namespace cjt

#endif  // CJT_UTIL_ERROR_H_
