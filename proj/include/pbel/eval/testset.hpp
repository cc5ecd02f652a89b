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

#include <fstream>
#include <string>
#include <vector>

#include "pbel/linker/kb.hpp"

namespace pbel {

// One gold-linked mention. `mention` is whatever the model reads: the surface
// string for grapheme models, IPA for phoneme and articulatory models.
struct TestRecord {
  std::string mention;
  std::string lang;
  std::uint64_t gold = 0;
  EntityType type = EntityType::kPer;
  friend bool operator==(const TestRecord&, const TestRecord&) = default;
};

struct TestSet {
  std::vector<TestRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  // Throws InvalidArgument naming the first record whose gold id is not in
  // `kb`.
  void check_against(const KnowledgeBase& kb) const {
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!kb.find(records[i].gold)) {
        throw InvalidArgument("test record " + std::to_string(i + 1) + ": gold entity " +
                              std::to_string(records[i].gold) + " is not in the knowledge base");
      }
    }
  }
};

// `mention<TAB>lang<TAB>gold_entity_id<TAB>type`. With a KB given, every gold
// id must resolve against it.
inline TestSet load_test_set(const std::string& path, const KnowledgeBase* kb = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open test set " + path);
  TestSet ts;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::chomp(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 4) {
      throw ParseError(path, lineno,
                       "expected 4 tab-separated columns, found " + std::to_string(cols.size()));
    }
    try {
      TestRecord r;
      if (cols[0].empty()) throw InvalidArgument("empty mention");
      r.mention = text::nfc(cols[0]);
      if (cols[1].empty()) throw InvalidArgument("empty language tag");
      r.lang = std::string(cols[1]);
      r.gold = parse_entity_id(cols[2]);
      const auto type = parse_entity_type(cols[3]);
      if (!type) {
        throw InvalidArgument("entity type must be PER, ORG or LOC, got '" +
                              std::string(cols[3]) + "'");
      }
      r.type = *type;
      if (kb && !kb->find(r.gold)) {
        throw InvalidArgument("gold entity " + std::to_string(r.gold) +
                              " is not in the knowledge base");
      }
      ts.records.push_back(std::move(r));
    } catch (const Error& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return ts;
}

inline void save_test_set(const TestSet& ts, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write test set " + path);
  for (const auto& r : ts.records) {
    out << r.mention << '\t' << r.lang << '\t' << r.gold << '\t' << to_string(r.type) << '\n';
  }
}

}  // namespace pbel
