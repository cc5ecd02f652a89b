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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pbel/error.hpp"
#include "pbel/representation/unicode.hpp"

namespace pbel {

struct TitlePair {
  std::string src;
  std::string en;
  friend bool operator==(const TitlePair&, const TitlePair&) = default;
  friend auto operator<=>(const TitlePair&, const TitlePair&) = default;
};

// Aligned (source-language title, English title) training pairs. Pairs are
// kept in insertion order; exact duplicates are dropped.
class ParallelTitleCorpus {
 public:
  ParallelTitleCorpus() = default;
  explicit ParallelTitleCorpus(std::string src_lang, std::string en_lang = "en")
      : src_lang_(std::move(src_lang)), en_lang_(std::move(en_lang)) {}

  // Returns false when the pair was already present.
  bool add(std::string src, std::string en) {
    if (src.empty() || en.empty()) {
      throw InvalidArgument("corpus pair sides must be non-empty");
    }
    TitlePair p{std::move(src), std::move(en)};
    if (!seen_.insert(p).second) return false;
    pairs_.push_back(std::move(p));
    return true;
  }

  void append(const ParallelTitleCorpus& other) {
    for (const auto& p : other.pairs_) add(p.src, p.en);
  }

  const std::vector<TitlePair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::string& src_lang() const { return src_lang_; }
  const std::string& en_lang() const { return en_lang_; }
  void set_src_lang(std::string lang) { src_lang_ = std::move(lang); }

  // First `n` pairs (or all of them when n exceeds the size).
  ParallelTitleCorpus head(std::size_t n) const {
    ParallelTitleCorpus out(src_lang_, en_lang_);
    for (std::size_t i = 0; i < std::min(n, pairs_.size()); ++i) {
      out.add(pairs_[i].src, pairs_[i].en);
    }
    return out;
  }

 private:
  std::string src_lang_;
  std::string en_lang_ = "en";
  std::vector<TitlePair> pairs_;
  std::set<TitlePair> seen_;
};

// Reads `src_title<TAB>en_title` lines. Blank lines are skipped.
inline ParallelTitleCorpus load_corpus(const std::string& path,
                                       std::string src_lang = "") {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path);
  ParallelTitleCorpus corpus(std::move(src_lang));
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string_view line = text::chomp(raw);
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 2) {
      throw ParseError(path, lineno, "expected 2 tab-separated columns, found " +
                                         std::to_string(cols.size()));
    }
    if (cols[0].empty() || cols[1].empty()) {
      throw ParseError(path, lineno, "empty title");
    }
    try {
      corpus.add(text::nfc(cols[0]), text::nfc(cols[1]));
    } catch (const FormatError& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return corpus;
}

inline void save_corpus(const ParallelTitleCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file " + path);
  for (const auto& p : corpus.pairs()) out << p.src << '\t' << p.en << '\n';
}

}  // namespace pbel
