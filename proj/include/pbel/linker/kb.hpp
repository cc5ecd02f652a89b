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
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbel/error.hpp"
#include "pbel/hash.hpp"
#include "pbel/representation/unicode.hpp"

namespace pbel {

enum class EntityType : std::uint8_t { kPer, kOrg, kLoc };

inline const char* to_string(EntityType t) {
  switch (t) {
    case EntityType::kPer: return "PER";
    case EntityType::kOrg: return "ORG";
    case EntityType::kLoc: return "LOC";
  }
  return "?";
}

inline std::optional<EntityType> parse_entity_type(std::string_view s) {
  if (s == "PER") return EntityType::kPer;
  if (s == "ORG") return EntityType::kOrg;
  if (s == "LOC") return EntityType::kLoc;
  return std::nullopt;
}

inline std::uint64_t parse_entity_id(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("entity id must be a non-negative integer, got '" + std::string(s) +
                          "'");
  }
  return v;
}

struct KbEntry {
  std::uint64_t id = 0;
  std::string title;
  std::optional<EntityType> type;
  std::map<std::string, std::string> pivots;  // language → parallel title

  const std::string* pivot(const std::string& lang) const {
    const auto it = pivots.find(lang);
    return it == pivots.end() ? nullptr : &it->second;
  }
  friend bool operator==(const KbEntry&, const KbEntry&) = default;
};

// English knowledge base. Entries are kept sorted by id, so row order is id
// order and "lowest row" means "lowest id" everywhere downstream.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::vector<KbEntry> entries) {
    for (auto& e : entries) add(std::move(e));
  }

  void add(KbEntry e) {
    validate(e);
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), e.id,
                                     [](const KbEntry& x, std::uint64_t id) { return x.id < id; });
    if (it != entries_.end() && it->id == e.id) {
      throw InvalidArgument("knowledge base: duplicate entity id " + std::to_string(e.id));
    }
    entries_.insert(it, std::move(e));
  }

  const std::vector<KbEntry>& entries() const { return entries_; }
  const KbEntry& operator[](std::size_t row) const { return entries_[row]; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::optional<std::size_t> row_of(std::uint64_t id) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                                     [](const KbEntry& x, std::uint64_t v) { return x.id < v; });
    if (it == entries_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - entries_.begin());
  }
  const KbEntry* find(std::uint64_t id) const {
    const auto row = row_of(id);
    return row ? &entries_[*row] : nullptr;
  }

  // Number of entries with a parallel title in `lang`.
  std::size_t pivot_count(const std::string& lang) const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [&](const KbEntry& e) { return e.pivot(lang); }));
  }

  std::uint64_t fingerprint() const {
    Fnv1a h;
    for (const auto& e : entries_) {
      h.update(std::to_string(e.id));
      h.update("\t");
      h.update(e.title);
      h.update("\t");
      h.update(e.type ? to_string(*e.type) : "");
      for (const auto& [lang, title] : e.pivots) {
        h.update("\t");
        h.update(lang);
        h.update("=");
        h.update(title);
      }
      h.update("\n");
    }
    return h.digest();
  }

  static void validate(const KbEntry& e) {
    auto clean = [](const std::string& s) {
      return s.find_first_of("\t\n\r") == std::string::npos;
    };
    if (e.title.empty()) throw InvalidArgument("empty English title");
    if (!clean(e.title)) throw InvalidArgument("title contains a tab or newline");
    text::require_utf8(e.title);
    for (const auto& [lang, title] : e.pivots) {
      if (lang.empty() || lang.find_first_of("=;\t\n\r") != std::string::npos) {
        throw InvalidArgument("bad pivot language tag '" + lang + "'");
      }
      if (title.empty()) throw InvalidArgument("empty pivot title for language " + lang);
      if (!clean(title) || title.find(';') != std::string::npos) {
        throw InvalidArgument("pivot title for " + lang + " contains a separator character");
      }
      text::require_utf8(title);
    }
  }

 private:
  std::vector<KbEntry> entries_;
};

// `entity_id<TAB>english_title<TAB>type<TAB>lang=title;lang=title…`. The type
// column may be empty or "-", and the pivot column may be empty or absent.
// Titles are NFC-normalized on load.
inline KnowledgeBase load_kb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open knowledge base " + path);
  KnowledgeBase kb;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string_view line = text::chomp(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() < 3 || cols.size() > 4) {
      throw ParseError(path, lineno,
                       "expected 3 or 4 tab-separated columns, found " +
                           std::to_string(cols.size()));
    }
    try {
      KbEntry e;
      e.id = parse_entity_id(cols[0]);
      if (cols[1].empty()) throw InvalidArgument("empty English title");
      e.title = text::nfc(cols[1]);
      if (!cols[2].empty() && cols[2] != "-") {
        e.type = parse_entity_type(cols[2]);
        if (!e.type) {
          throw InvalidArgument("entity type must be PER, ORG or LOC, got '" +
                                std::string(cols[2]) + "'");
        }
      }
      if (cols.size() == 4 && !cols[3].empty()) {
        for (const auto item : text::split(cols[3], ';')) {
          if (item.empty()) continue;
          const auto eq = item.find('=');
          if (eq == std::string_view::npos) {
            throw InvalidArgument("pivot item '" + std::string(item) + "' lacks '='");
          }
          const std::string lang(item.substr(0, eq));
          if (!e.pivots.emplace(lang, text::nfc(item.substr(eq + 1))).second) {
            throw InvalidArgument("pivot language " + lang + " repeated");
          }
        }
      }
      kb.add(std::move(e));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& err) {
      throw ParseError(path, lineno, err.what());
    }
  }
  return kb;
}

inline void save_kb(const KnowledgeBase& kb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write knowledge base " + path);
  for (const auto& e : kb.entries()) {
    out << e.id << '\t' << e.title << '\t' << (e.type ? to_string(*e.type) : "-") << '\t';
    bool first = true;
    for (const auto& [lang, title] : e.pivots) {
      out << (first ? "" : ";") << lang << '=' << title;
      first = false;
    }
    out << '\n';
  }
}

}  // namespace pbel
