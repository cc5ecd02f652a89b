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
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbel/corpus.hpp"
#include "pbel/error.hpp"
#include "pbel/representation/unicode.hpp"

namespace pbel {

struct Translation {
  std::string en;
  double p = 0.0;
  friend bool operator==(const Translation&, const Translation&) = default;
};

// Source word → English translations, most probable first (ties by word).
class AlignmentLexicon {
 public:
  void set(const std::string& src, std::vector<Translation> ts) {
    if (src.empty()) throw InvalidArgument("lexicon: empty source word");
    if (ts.empty()) throw InvalidArgument("lexicon: no translations for '" + src + "'");
    double sum = 0.0;
    for (const auto& t : ts) {
      if (t.en.empty()) throw InvalidArgument("lexicon: empty translation for '" + src + "'");
      if (!(t.p > 0.0 && t.p <= 1.0)) {
        throw InvalidArgument("lexicon: probability outside (0, 1] for '" + src + "'");
      }
      sum += t.p;
    }
    if (sum > 1.0 + 1e-6) {
      throw InvalidArgument("lexicon: probabilities for '" + src + "' sum above 1");
    }
    std::sort(ts.begin(), ts.end(), [](const Translation& a, const Translation& b) {
      return a.p != b.p ? a.p > b.p : a.en < b.en;
    });
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (ts[i].en == ts[i - 1].en) {
        throw InvalidArgument("lexicon: '" + src + "' lists '" + ts[i].en + "' twice");
      }
    }
    entries_[src] = std::move(ts);
  }

  const std::vector<Translation>* lookup(const std::string& src) const {
    const auto it = entries_.find(src);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::optional<std::string> best(const std::string& src) const {
    const auto* ts = lookup(src);
    if (!ts) return std::nullopt;
    return ts->front().en;
  }

  const std::map<std::string, std::vector<Translation>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  friend bool operator==(const AlignmentLexicon&, const AlignmentLexicon&) = default;

 private:
  std::map<std::string, std::vector<Translation>> entries_;
};

struct Model1Options {
  std::size_t iterations = 5;
  std::size_t top_n = 3;
  double min_prob = 0.05;
};

struct Model1Result {
  AlignmentLexicon lexicon;
  // Corpus log-likelihood under the initial table and after every iteration
  // (iterations + 1 values).
  std::vector<double> log_likelihood;
};

// IBM Model 1 estimating t(en | src) over case-folded whitespace tokens. A
// NULL token on the source side absorbs English words with no counterpart; it
// never enters the lexicon.
inline Model1Result train_model1(const ParallelTitleCorpus& corpus, const Model1Options& opt = {}) {
  if (corpus.empty()) throw EmptyInputError("train_model1: empty corpus");
  if (opt.top_n == 0) throw InvalidArgument("train_model1: top_n must be positive");

  std::map<std::string, int> src_ids{{"", 0}}, en_ids;  // "" is NULL
  std::vector<std::string> src_words{""}, en_words;
  auto intern = [](std::map<std::string, int>& ids, std::vector<std::string>& words,
                   const std::string& w) {
    const auto [it, fresh] = ids.try_emplace(w, static_cast<int>(words.size()));
    if (fresh) words.push_back(w);
    return it->second;
  };
  struct Sent {
    std::vector<int> src, en;
  };
  std::vector<Sent> sents;
  for (const auto& pair : corpus.pairs()) {
    Sent s;
    s.src.push_back(0);
    for (const auto& w : text::split_whitespace(text::fold_case(pair.src))) {
      s.src.push_back(intern(src_ids, src_words, w));
    }
    for (const auto& w : text::split_whitespace(text::fold_case(pair.en))) {
      s.en.push_back(intern(en_ids, en_words, w));
    }
    if (s.en.empty() || s.src.size() == 1) continue;
    sents.push_back(std::move(s));
  }
  if (sents.empty()) throw EmptyInputError("train_model1: no non-blank title pairs");

  // t[f] holds t(e|f) for the English words e co-occurring with f; every
  // other entry stays zero after the first M-step and never affects the
  // likelihood, so it is not stored.
  const double uniform = 1.0 / static_cast<double>(en_words.size());
  std::vector<std::map<int, double>> t(src_words.size());
  for (const auto& s : sents) {
    for (int f : s.src) {
      for (int e : s.en) t[static_cast<std::size_t>(f)].emplace(e, uniform);
    }
  }

  Model1Result result;
  auto e_step = [&](std::vector<std::map<int, double>>* counts) {
    double ll = 0.0;
    for (const auto& s : sents) {
      const double norm = 1.0 / static_cast<double>(s.src.size());
      for (int e : s.en) {
        double z = 0.0;
        for (int f : s.src) z += t[static_cast<std::size_t>(f)].at(e);
        ll += std::log(z * norm);
        if (!counts) continue;
        for (int f : s.src) {
          (*counts)[static_cast<std::size_t>(f)][e] += t[static_cast<std::size_t>(f)].at(e) / z;
        }
      }
    }
    return ll;
  };
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    std::vector<std::map<int, double>> counts(src_words.size());
    result.log_likelihood.push_back(e_step(&counts));
    for (std::size_t f = 0; f < counts.size(); ++f) {
      double total = 0.0;
      for (const auto& [e, c] : counts[f]) total += c;
      for (auto& [e, p] : t[f]) p = counts[f][e] / total;
    }
  }
  result.log_likelihood.push_back(e_step(nullptr));

  for (std::size_t f = 1; f < src_words.size(); ++f) {
    std::vector<Translation> ts;
    for (const auto& [e, p] : t[f]) {
      if (p >= opt.min_prob) ts.push_back({en_words[static_cast<std::size_t>(e)], p});
    }
    std::sort(ts.begin(), ts.end(), [](const Translation& a, const Translation& b) {
      return a.p != b.p ? a.p > b.p : a.en < b.en;
    });
    if (ts.size() > opt.top_n) ts.resize(opt.top_n);
    if (!ts.empty()) result.lexicon.set(src_words[f], std::move(ts));
  }
  return result;
}

// `src_word<TAB>en_word<TAB>probability`, sorted by source word, then by
// descending probability. Probabilities are written in shortest round-trip
// form.
inline void save_lexicon(const AlignmentLexicon& lex, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write lexicon " + path);
  char buf[32];
  for (const auto& [src, ts] : lex.entries()) {
    for (const auto& t : ts) {
      const auto res = std::to_chars(buf, buf + sizeof buf, t.p);
      out << src << '\t' << t.en << '\t' << std::string_view(buf, res.ptr - buf) << '\n';
    }
  }
}

inline AlignmentLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon " + path);
  std::map<std::string, std::vector<Translation>> rows;
  std::map<std::string, std::size_t> first_line;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = text::chomp(raw);
    if (line.empty()) continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3) {
      throw ParseError(path, lineno,
                       "expected 3 tab-separated columns, found " + std::to_string(cols.size()));
    }
    if (cols[0].empty() || cols[1].empty()) throw ParseError(path, lineno, "empty word");
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), p);
    if (ec != std::errc() || ptr != cols[2].data() + cols[2].size()) {
      throw ParseError(path, lineno, "probability is not a number: '" + std::string(cols[2]) + "'");
    }
    const std::string src(cols[0]);
    first_line.try_emplace(src, lineno);
    rows[src].push_back({std::string(cols[1]), p});
  }
  AlignmentLexicon lex;
  for (auto& [src, ts] : rows) {
    try {
      lex.set(src, std::move(ts));
    } catch (const InvalidArgument& e) {
      throw ParseError(path, first_line[src], e.what());
    }
  }
  return lex;
}

}  // namespace pbel
