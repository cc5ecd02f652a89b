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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pbel/corpus.hpp"
#include "pbel/representation/feature_table.hpp"
#include "pbel/representation/unicode.hpp"
#include "pbel/representation/vocab.hpp"

namespace pbel {

// A title or mention as a symbol sequence. Grapheme and phoneme sequences use
// `ids`; articulatory sequences use `rows`. `units` keeps the surface symbol
// at every position in all three cases.
struct SeqRepr {
  ReprKind kind = ReprKind::kGrapheme;
  std::vector<std::int32_t> ids;
  std::vector<FeatureRow> rows;
  std::vector<std::string> units;

  std::size_t length() const {
    return kind == ReprKind::kArticulatory ? rows.size() : ids.size();
  }
  bool empty() const { return length() == 0; }

  friend bool operator==(const SeqRepr&, const SeqRepr&) = default;
};

// One Unicode scalar per unit, after NFC.
inline std::vector<std::string> grapheme_units(std::string_view s) {
  if (s.empty()) throw EmptyInputError("graphemes: empty input");
  auto units = text::scalars(text::nfc(s));
  if (units.empty()) throw EmptyInputError("graphemes: empty input");
  return units;
}

inline SeqRepr graphemes(std::string_view s, const SymbolVocab& vocab) {
  SeqRepr seq;
  seq.kind = ReprKind::kGrapheme;
  seq.units = grapheme_units(s);
  seq.ids.reserve(seq.units.size());
  for (const auto& u : seq.units) seq.ids.push_back(vocab.lookup(u));
  return seq;
}

struct Segment {
  std::string text;
  bool known = false;  // present in the feature table
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Greedy longest-match segmentation of an IPA string against the table's
// segment inventory. Scalars that start no known segment become single-scalar
// unknown segments.
inline std::vector<Segment> segment_ipa(std::string_view ipa, const FeatureTable& table) {
  if (ipa.empty()) throw EmptyInputError("phonemes: empty input");
  const auto cps = text::scalars(text::nfc(ipa));
  if (cps.empty()) throw EmptyInputError("phonemes: empty input");
  std::vector<Segment> out;
  std::size_t i = 0;
  const std::size_t longest = std::max<std::size_t>(1, table.max_segment_length());
  while (i < cps.size()) {
    std::size_t best = 0;
    std::string candidate;
    std::string best_text;
    for (std::size_t len = 1; len <= longest && i + len <= cps.size(); ++len) {
      candidate += cps[i + len - 1];
      if (table.contains(candidate)) {
        best = len;
        best_text = candidate;
      }
    }
    if (best == 0) {
      out.push_back({cps[i], false});
      i += 1;
    } else {
      out.push_back({std::move(best_text), true});
      i += best;
    }
  }
  return out;
}

inline SeqRepr phonemes(std::string_view ipa, const FeatureTable& table,
                        const SymbolVocab& vocab) {
  SeqRepr seq;
  seq.kind = ReprKind::kPhoneme;
  for (auto& seg : segment_ipa(ipa, table)) {
    seq.ids.push_back(seg.known ? vocab.lookup(seg.text) : SymbolVocab::kUnk);
    seq.units.push_back(std::move(seg.text));
  }
  return seq;
}

// One feature row per phoneme segment; segments missing from the table map to
// the all-zero row.
inline SeqRepr featurize(const SeqRepr& seq, const FeatureTable& table) {
  if (seq.kind != ReprKind::kPhoneme) {
    throw KindMismatchError("featurize expects a phoneme sequence");
  }
  SeqRepr out;
  out.kind = ReprKind::kArticulatory;
  out.units = seq.units;
  out.rows.reserve(seq.units.size());
  for (const auto& u : seq.units) {
    const FeatureRow* row = table.find(u);
    out.rows.push_back(row ? *row : FeatureRow{});
  }
  return out;
}

inline SeqRepr articulatory(std::string_view ipa, const FeatureTable& table) {
  return featurize(phonemes(ipa, table, SymbolVocab(ReprKind::kPhoneme, {})), table);
}

// Converts a string (text for graphemes, IPA otherwise) into the sequence
// type an encoder of `kind` consumes.
inline SeqRepr represent(std::string_view s, ReprKind kind, const SymbolVocab& vocab,
                         const FeatureTable* table) {
  if (kind == ReprKind::kGrapheme) return graphemes(s, vocab);
  if (!table) {
    throw InvalidArgument(std::string(to_string(kind)) +
                          " representation needs a feature table");
  }
  if (kind == ReprKind::kPhoneme) return phonemes(s, *table, vocab);
  return articulatory(s, *table);
}

// Source-side and English-side vocabularies over every training symbol,
// sorted by code point. Articulatory input has no symbol vocabulary and
// yields two empty vocabularies.
inline std::pair<SymbolVocab, SymbolVocab> build_vocab(const ParallelTitleCorpus& corpus,
                                                       ReprKind kind,
                                                       const FeatureTable* table = nullptr) {
  if (corpus.empty()) throw EmptyInputError("build_vocab: empty corpus");
  if (kind == ReprKind::kArticulatory) {
    return {SymbolVocab(ReprKind::kPhoneme, {}), SymbolVocab(ReprKind::kPhoneme, {})};
  }
  if (kind == ReprKind::kPhoneme && !table) {
    throw InvalidArgument("build_vocab: phoneme vocabularies need a feature table");
  }
  std::vector<std::string> src, en;
  auto collect = [&](const std::string& s, std::vector<std::string>& out) {
    if (kind == ReprKind::kGrapheme) {
      for (auto& u : grapheme_units(s)) out.push_back(std::move(u));
    } else {
      for (auto& seg : segment_ipa(s, *table)) {
        if (seg.known) out.push_back(std::move(seg.text));
      }
    }
  };
  for (const auto& p : corpus.pairs()) {
    collect(p.src, src);
    collect(p.en, en);
  }
  return {SymbolVocab::from_symbols(kind, std::move(src)),
          SymbolVocab::from_symbols(kind, std::move(en))};
}

}  // namespace pbel
