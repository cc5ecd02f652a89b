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

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbel/error.hpp"
#include "pbel/hash.hpp"

namespace pbel {

enum class ReprKind : std::uint8_t { kGrapheme, kPhoneme, kArticulatory };

inline const char* to_string(ReprKind k) {
  switch (k) {
    case ReprKind::kGrapheme: return "grapheme";
    case ReprKind::kPhoneme: return "phoneme";
    case ReprKind::kArticulatory: return "articulatory";
  }
  return "?";
}

inline ReprKind parse_repr_kind(const std::string& s) {
  if (s == "grapheme") return ReprKind::kGrapheme;
  if (s == "phoneme") return ReprKind::kPhoneme;
  if (s == "articulatory") return ReprKind::kArticulatory;
  throw InvalidArgument("unknown representation kind '" + s +
                        "' (expected grapheme, phoneme or articulatory)");
}

// Symbol inventory with id 0 reserved for unknown symbols; symbols[i] has id
// i + 1.
class SymbolVocab {
 public:
  static constexpr std::int32_t kUnk = 0;

  SymbolVocab() = default;
  SymbolVocab(ReprKind kind, std::vector<std::string> symbols)
      : kind_(kind), symbols_(std::move(symbols)) {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i].empty()) throw InvalidArgument("vocab: empty symbol");
      if (symbols_[i].find('\n') != std::string::npos) {
        throw InvalidArgument("vocab: symbol contains a newline");
      }
      if (!ids_.emplace(symbols_[i], static_cast<std::int32_t>(i + 1)).second) {
        throw InvalidArgument("vocab: duplicate symbol '" + symbols_[i] + "'");
      }
    }
  }

  // Sorted (code point order) vocabulary over the distinct symbols given.
  static SymbolVocab from_symbols(ReprKind kind, std::vector<std::string> symbols) {
    std::sort(symbols.begin(), symbols.end());
    symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
    return SymbolVocab(kind, std::move(symbols));
  }

  std::int32_t lookup(const std::string& symbol) const {
    const auto it = ids_.find(symbol);
    return it == ids_.end() ? kUnk : it->second;
  }

  const std::string& symbol(std::int32_t id) const {
    if (id <= 0 || static_cast<std::size_t>(id) > symbols_.size()) {
      throw InvalidArgument("vocab: id out of range");
    }
    return symbols_[static_cast<std::size_t>(id - 1)];
  }

  // Number of embedding rows needed: all symbols plus UNK.
  std::size_t rows() const { return symbols_.size() + 1; }
  std::size_t size() const { return symbols_.size(); }
  ReprKind kind() const { return kind_; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::uint64_t fingerprint() const {
    Fnv1a h;
    h.update(to_string(kind_));
    for (const auto& s : symbols_) {
      h.update("\n");
      h.update(s);
    }
    return h.digest();
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocab file " + path);
    for (const auto& s : symbols_) out << s << '\n';
  }

  static SymbolVocab load(const std::string& path, ReprKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocab file " + path);
    std::vector<std::string> symbols;
    std::string line;
    while (std::getline(in, line)) symbols.push_back(line);
    return SymbolVocab(kind, std::move(symbols));
  }

  friend bool operator==(const SymbolVocab& a, const SymbolVocab& b) {
    return a.kind_ == b.kind_ && a.symbols_ == b.symbols_;
  }

 private:
  ReprKind kind_ = ReprKind::kGrapheme;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

}  // namespace pbel
