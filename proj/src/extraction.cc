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

#include "kgleak/extraction.h"

#include <cctype>
#include <optional>
#include <vector>

namespace kgleak {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

void SkipEmphasis(std::string_view& s) {
  while (!s.empty() && (s.front() == '*' || s.front() == '_')) {
    s.remove_prefix(1);
  }
}

// "- ", "* ", "+ ", "1. ", "2) ", "## ".
void SkipListMarker(std::string_view& s) {
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*' || s[0] == '+') &&
      IsSpace(s[1])) {
    s = Trim(s.substr(1));
    return;
  }
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i + 1 < s.size() && (s[i] == '.' || s[i] == ')') &&
      IsSpace(s[i + 1])) {
    s = Trim(s.substr(i + 1));
    return;
  }
  i = 0;
  while (i < s.size() && s[i] == '#') ++i;
  if (i > 0) s = Trim(s.substr(i));
}

bool ConsumeKeyword(std::string_view& s, std::string_view keyword) {
  if (s.size() < keyword.size()) return false;
  for (std::size_t i = 0; i < keyword.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != keyword[i]) {
      return false;
    }
  }
  s.remove_prefix(keyword.size());
  return true;
}

// After a keyword: optional emphasis, colon, emphasis. Returns whether a colon
// was present; `s` is left at the value.
bool ConsumeSeparator(std::string_view& s) {
  SkipEmphasis(s);
  const bool colon = !s.empty() && s.front() == ':';
  if (colon) s.remove_prefix(1);
  SkipEmphasis(s);
  return colon;
}

std::string CollapseWhitespace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (IsSpace(c) || c == '\n') {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace

ClassifiedLine ClassifyLine(std::string_view line) {
  std::string_view s = Trim(line);
  if (s.empty()) return {LineKind::kBlank, ""};
  const std::string_view original = s;
  SkipListMarker(s);
  SkipEmphasis(s);

  std::string_view rest = s;
  if (ConsumeKeyword(rest, "entity")) {
    const bool next_is_break =
        rest.empty() || rest.front() == ':' || rest.front() == '*' ||
        rest.front() == '_' || IsSpace(rest.front());
    if (next_is_break) {
      const bool colon = ConsumeSeparator(rest);
      if (colon || rest.empty() || IsSpace(rest.front())) {
        return {LineKind::kEntity, std::string(Trim(rest))};
      }
    }
  }
  rest = s;
  if (ConsumeKeyword(rest, "relationships") ||
      ConsumeKeyword(rest, "relationship")) {
    ConsumeSeparator(rest);
    if (Trim(rest).empty()) return {LineKind::kRelationships, ""};
  }
  struct Field {
    std::string_view keyword;
    LineKind kind;
  };
  for (const Field& f : {Field{"description", LineKind::kDescription},
                         Field{"source", LineKind::kSource},
                         Field{"target", LineKind::kTarget}}) {
    rest = s;
    if (ConsumeKeyword(rest, f.keyword) && ConsumeSeparator(rest)) {
      return {f.kind, std::string(Trim(rest))};
    }
  }
  return {LineKind::kText, std::string(original)};
}

namespace {

struct PendingTriplet {
  std::string source;
  std::optional<std::string> target;
  std::string description;
  bool has_description = false;
};

struct PendingBlock {
  std::string name;
  std::string description;
};

class ResponseParser {
 public:
  ParsedCandidates Run(std::string_view response) {
    for (std::string_view raw : SplitLines(response)) Feed(ClassifyLine(raw));
    FinishTriplet();
    FinishBlock();
    return std::move(out_);
  }

 private:
  enum class Capture { kNone, kEntityDescription, kRelationDescription };

  void Feed(const ClassifiedLine& line) {
    switch (line.kind) {
      case LineKind::kBlank:
        capture_ = Capture::kNone;
        return;
      case LineKind::kEntity:
        FinishTriplet();
        FinishBlock();
        block_ = PendingBlock{line.value, ""};
        capture_ = Capture::kNone;
        return;
      case LineKind::kDescription:
        if (triplet_ && !triplet_->has_description) {
          triplet_->description = line.value;
          triplet_->has_description = true;
          capture_ = Capture::kRelationDescription;
        } else if (block_ && !triplet_) {
          Append(block_->description, line.value);
          capture_ = Capture::kEntityDescription;
        } else {
          capture_ = Capture::kNone;
        }
        return;
      case LineKind::kRelationships:
        FinishTriplet();
        capture_ = Capture::kNone;
        return;
      case LineKind::kSource:
        FinishTriplet();
        if (block_) triplet_ = PendingTriplet{line.value, std::nullopt, "", false};
        capture_ = Capture::kNone;
        return;
      case LineKind::kTarget:
        if (triplet_ && !triplet_->target) triplet_->target = line.value;
        capture_ = Capture::kNone;
        return;
      case LineKind::kText:
        if (capture_ == Capture::kEntityDescription && block_) {
          Append(block_->description, line.value);
        } else if (capture_ == Capture::kRelationDescription && triplet_) {
          Append(triplet_->description, line.value);
        }
        return;
    }
  }

  static void Append(std::string& into, std::string_view more) {
    if (!into.empty() && !more.empty()) into.push_back(' ');
    into.append(more);
  }

  void FinishTriplet() {
    if (!triplet_) return;
    PendingTriplet t = std::move(*triplet_);
    triplet_.reset();
    // Structurally absent target: drop without stubbing.
    if (!t.target) return;
    Relation r{Canonicalize(t.source), Canonicalize(*t.target),
               CollapseWhitespace(t.description)};
    if (r.source.empty() || r.target.empty()) {
      ++out_.reject_count;
      return;
    }
    relations_.push_back(std::move(r));
  }

  void FinishBlock() {
    if (!block_) return;
    PendingBlock b = std::move(*block_);
    block_.reset();
    Entity e{Canonicalize(b.name), CollapseWhitespace(b.description)};
    if (e.label.empty()) {
      ++out_.reject_count;
    } else {
      out_.graph.AddEntity(e);
    }
    // Relations are added after their block so a block's description wins
    // over the stub its own relationships would otherwise create.
    for (const Relation& r : relations_) out_.graph.AddRelation(r);
    relations_.clear();
  }

  ParsedCandidates out_;
  std::optional<PendingBlock> block_;
  std::optional<PendingTriplet> triplet_;
  std::vector<Relation> relations_;
  Capture capture_ = Capture::kNone;
};

}  // namespace

ParsedCandidates Parse(std::string_view response) {
  return ResponseParser().Run(response);
}

std::string EvidenceText(std::string_view response) {
  std::string out;
  for (std::string_view raw : SplitLines(response)) {
    const ClassifiedLine line = ClassifyLine(raw);
    switch (line.kind) {
      case LineKind::kEntity:
      case LineKind::kSource:
      case LineKind::kTarget:
        continue;
      default:
        out.append(line.value);
        out.push_back('\n');
    }
  }
  return out;
}

}  // namespace kgleak
