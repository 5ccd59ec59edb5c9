// Copyright 2026 The kgleak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fixed text assets: the extraction command appended to every attack query
// and the prompt templates of the model-backed query generator and filter.
// Slots are written as {name} and filled by FillTemplate.

#ifndef KGLEAK_PROMPTS_H_
#define KGLEAK_PROMPTS_H_

#include <map>
#include <string>
#include <string_view>

namespace kgleak::prompts {

extern const std::string_view kExtractionCommand;

extern const std::string_view kFilterSystemLenient;
extern const std::string_view kFilterSystemStrict;
extern const std::string_view kFilterUser;

extern const std::string_view kQuerySystem;
extern const std::string_view kExploreUser;
extern const std::string_view kExploitUser;

// Replaces every {key} with its value. Unknown slots are left untouched.
std::string FillTemplate(std::string_view tmpl,
                         const std::map<std::string, std::string>& slots);

}  // namespace kgleak::prompts

#endif  // KGLEAK_PROMPTS_H_
