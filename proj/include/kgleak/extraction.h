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

#ifndef KGLEAK_EXTRACTION_H_
#define KGLEAK_EXTRACTION_H_

#include <cstddef>
#include <string>
#include <string_view>

#include "kgleak/kg.h"

namespace kgleak {

// Candidates discovered in one response. Relation endpoints without their
// own block are present as stub entities.
struct ParsedCandidates {
  KnowledgeGraph graph;
  std::size_t reject_count = 0;
};

enum class LineKind {
  kBlank,
  kEntity,
  kDescription,
  kRelationships,
  kSource,
  kTarget,
  kText,
};

struct ClassifiedLine {
  LineKind kind = LineKind::kText;
  std::string value;
};

// Recognizes the response grammar's line types, tolerating list markers
// ("-", "*", "1.", "#"), markdown emphasis around keywords and a missing
// colon after ENTITY. Keywords match case-insensitively.
ClassifiedLine ClassifyLine(std::string_view line);

// Deterministic, tolerant parse of a response in the extraction grammar.
// Never fails: text without headers yields no candidates.
ParsedCandidates Parse(std::string_view response);

// The response with the structured name fields (ENTITY, Source, Target)
// removed. What remains is the evidence a name must appear in to count as
// supported: narrative text and descriptions.
std::string EvidenceText(std::string_view response);

}  // namespace kgleak

#endif  // KGLEAK_EXTRACTION_H_
