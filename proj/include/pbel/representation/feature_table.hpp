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

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>

#include "pbel/error.hpp"
#include "pbel/hash.hpp"
#include "pbel/representation/unicode.hpp"

namespace pbel {

inline constexpr std::size_t kFeatureDim = 21;
using FeatureRow = std::array<std::int8_t, kFeatureDim>;

// IPA segment → articulatory feature row with entries in {-1, 0, +1}.
class FeatureTable {
 public:
  FeatureTable() = default;

  void add(const std::string& segment, const FeatureRow& row) {
    if (segment.empty()) throw InvalidArgument("feature table: empty segment");
    for (auto v : row) {
      if (v < -1 || v > 1) {
        throw InvalidArgument("feature table: values must be in {-1,0,1}");
      }
    }
    const std::string key = text::nfc(segment);
    if (!rows_.emplace(key, row).second) {
      throw InvalidArgument("feature table: duplicate segment '" + key + "'");
    }
    max_len_ = std::max(max_len_, text::scalars(key).size());
  }

  const FeatureRow* find(const std::string& segment) const {
    const auto it = rows_.find(segment);
    return it == rows_.end() ? nullptr : &it->second;
  }
  bool contains(const std::string& segment) const { return rows_.count(segment) > 0; }

  // Longest segment length, in scalar values.
  std::size_t max_segment_length() const { return max_len_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::map<std::string, FeatureRow>& rows() const { return rows_; }

  std::uint64_t fingerprint() const {
    Fnv1a h;
    for (const auto& [seg, row] : rows_) {
      h.update(seg);
      h.update("\t");
      h.update(row.data(), row.size());
      h.update("\n");
    }
    return h.digest();
  }

  // `segment<TAB>f1,f2,…,f21` per line; blank lines and lines starting with
  // '#' are ignored.
  static FeatureTable load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature table " + path);
    FeatureTable table;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::string_view line = text::chomp(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto cols = text::split(line, '\t');
      if (cols.size() != 2) {
        throw ParseError(path, lineno, "expected segment<TAB>features");
      }
      const auto values = text::split(cols[1], ',');
      if (values.size() != kFeatureDim) {
        throw ParseError(path, lineno,
                         "expected 21 features, found " + std::to_string(values.size()));
      }
      FeatureRow row{};
      for (std::size_t i = 0; i < kFeatureDim; ++i) {
        if (values[i] == "1" || values[i] == "+1") {
          row[i] = 1;
        } else if (values[i] == "0") {
          row[i] = 0;
        } else if (values[i] == "-1") {
          row[i] = -1;
        } else {
          throw ParseError(path, lineno, "feature value must be -1, 0 or 1");
        }
      }
      try {
        table.add(std::string(cols[0]), row);
      } catch (const Error& e) {
        throw ParseError(path, lineno, e.what());
      }
    }
    return table;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write feature table " + path);
    for (const auto& [seg, row] : rows_) {
      out << seg << '\t';
      for (std::size_t i = 0; i < kFeatureDim; ++i) {
        out << (i ? "," : "") << static_cast<int>(row[i]);
      }
      out << '\n';
    }
  }

 private:
  std::map<std::string, FeatureRow> rows_;
  std::size_t max_len_ = 0;
};

}  // namespace pbel
