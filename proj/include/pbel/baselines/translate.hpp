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

#include <optional>
#include <string>

#include "pbel/baselines/exact.hpp"
#include "pbel/baselines/model1.hpp"

namespace pbel {

// Word-by-word translation with the most probable lexicon entry per token.
// Tokens without an entry pass through unchanged. Word order is kept.
inline std::string translate_title(std::string_view mention, const AlignmentLexicon& lex) {
  std::string out;
  for (const auto& w : text::split_whitespace(text::fold_case(mention))) {
    if (!out.empty()) out += ' ';
    const auto best = lex.best(w);
    out += best ? *best : w;
  }
  return out;
}

inline std::optional<std::uint64_t> translate_link(std::string_view mention,
                                                   const AlignmentLexicon& lex,
                                                   const ExactMatcher& matcher) {
  return matcher.link(translate_title(mention, lex));
}

inline std::optional<std::uint64_t> translate_link(std::string_view mention,
                                                   const AlignmentLexicon& lex,
                                                   const KnowledgeBase& kb) {
  return translate_link(mention, lex, ExactMatcher(kb));
}

}  // namespace pbel
