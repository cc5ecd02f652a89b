// Copyright 2026 The pbel Authors.
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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbel/linker/kb.hpp"

namespace pbel {

// Matching key for string baselines: NFC, full case folding, whitespace runs
// collapsed to one space and trimmed.
inline std::string match_key(std::string_view s) {
  std::string out;
  for (const auto& w : text::split_whitespace(text::fold_case(s))) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

// Exact-string baseline. With pivot languages given, titles in those
// languages are matched as well. A key shared by several entries resolves to
// the lowest id.
class ExactMatcher {
 public:
  explicit ExactMatcher(const KnowledgeBase& kb, const std::vector<std::string>& pivot_langs = {}) {
    for (const auto& e : kb.entries()) {
      index_.try_emplace(match_key(e.title), e.id);
      for (const auto& lang : pivot_langs) {
        if (const auto* t = e.pivot(lang)) index_.try_emplace(match_key(*t), e.id);
      }
    }
  }

  std::optional<std::uint64_t> link(std::string_view mention) const {
    const auto it = index_.find(match_key(mention));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  // Entries are visited in id order, so try_emplace keeps the lowest id.
  std::unordered_map<std::string, std::uint64_t> index_;
};

inline std::optional<std::uint64_t> exact_link(std::string_view mention, const KnowledgeBase& kb,
                                               const std::vector<std::string>& pivot_langs = {}) {
  return ExactMatcher(kb, pivot_langs).link(mention);
}

}  // namespace pbel
