// pipeline/presets.h

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

#ifndef CJT_PIPELINE_PRESETS_H_
#define CJT_PIPELINE_PRESETS_H_

#include <string>
#include <vector>

#include "util/kv_config.h"

namespace cjt::pipeline {

// Named experiment scales. `tiny` finishes in a couple of minutes and backs
// the smoke and determinism checks; `small` is the trend-evaluation scale;
// `medium` is an overnight CPU run; `paper-defaults` is `small` with every
// published hyperparameter pinned explicitly. Returned as a config overlay:
// file values and --set overrides are applied on top.
cjt::util::KvConfig preset_config(const std::string& name);

const std::vector<std::string>& preset_names();

}  // namespace cjt::pipeline

#endif  // CJT_PIPELINE_PRESETS_H_
