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

// Seeded generators for synthetic corpora and fixtures.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pbel/corpus.hpp"
#include "pbel/encoder/params.hpp"
#include "pbel/numerics/random.hpp"

namespace pbel::testing {

// A pronounceable lowercase word of `syllables` CV or CVC syllables.
inline std::string random_word(nn::Rng& rng, std::size_t syllables) {
  static const std::string consonants = "bcdfghjklmnprstvwz";
  static const std::string vowels = "aeiou";
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w += consonants[rng.below(consonants.size())];
    w += vowels[rng.below(vowels.size())];
    if (rng.below(3) == 0) w += consonants[rng.below(consonants.size())];
  }
  return w;
}

// One or two capitalized words.
inline std::string random_title(nn::Rng& rng) {
  const std::size_t words = 1 + (rng.below(4) == 0 ? 1 : 0);
  std::string t;
  for (std::size_t i = 0; i < words; ++i) {
    std::string w = random_word(rng, 2 + rng.below(2));
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (i) t += ' ';
    t += w;
  }
  return t;
}

inline std::vector<std::string> distinct_titles(nn::Rng& rng, std::size_t n) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  while (out.size() < n) {
    auto t = random_title(rng);
    if (seen.insert(t).second) out.push_back(std::move(t));
  }
  return out;
}

// Fixed one-to-one substitution from ASCII letters into a non-Latin
// alphabet. Spaces pass through. Different seeds give different ciphers.
class Cipher {
 public:
  explicit Cipher(std::uint64_t seed) {
    std::vector<std::string> target;
    for (char32_t cp = 0x3b1; cp <= 0x3c9; ++cp) target.push_back(encode(cp));   // Greek
    for (char32_t cp = 0x430; cp <= 0x44f; ++cp) target.push_back(encode(cp));   // Cyrillic
    nn::Rng rng(seed);
    rng.shuffle(target);
    for (char c = 'a'; c <= 'z'; ++c) map_[c] = target[static_cast<std::size_t>(c - 'a')];
  }

  std::string operator()(const std::string& s) const {
    std::string out;
    for (char c : s) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      const auto it = map_.find(c);
      out += it == map_.end() ? std::string(1, c) : it->second;
    }
    return out;
  }

  // Same cipher with `n` letters remapped to other letters' images, a
  // closely related "language".
  Cipher perturbed(std::uint64_t seed, std::size_t n) const {
    Cipher c = *this;
    nn::Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      const char a = static_cast<char>('a' + rng.below(26));
      const char b = static_cast<char>('a' + rng.below(26));
      std::swap(c.map_[a], c.map_[b]);
    }
    return c;
  }

 private:
  static std::string encode(char32_t cp) {
    std::string s;
    s += static_cast<char>(0xc0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3f));
    return s;
  }
  std::map<char, std::string> map_;
};

inline ParallelTitleCorpus cipher_corpus(const Cipher& cipher,
                                         const std::vector<std::string>& titles,
                                         const std::string& lang = "xx") {
  ParallelTitleCorpus c(lang);
  for (const auto& t : titles) c.add(cipher(t), t);
  return c;
}

template <typename To, typename From>
nn::Parameter<To> cast_parameter(const nn::Parameter<From>& p) {
  nn::Tensor<To> t = nn::Tensor<To>::zeros(p.value.shape);
  std::transform(p.value.data.begin(), p.value.data.end(), t.data.begin(),
                 [](From x) { return static_cast<To>(x); });
  return nn::Parameter<To>(p.name, std::move(t));
}

template <typename To, typename From>
EncoderParams<To> cast_params(const EncoderParams<From>& p) {
  EncoderParams<To> out;
  out.kind = p.kind;
  out.dims = p.dims;
  out.margin = p.margin;
  out.src_lang = p.src_lang;
  out.en_lang = p.en_lang;
  out.src_vocab = p.src_vocab;
  out.en_vocab = p.en_vocab;
  out.feature_table_hash = p.feature_table_hash;
  auto side = [](const SideEncoder<From>& s) {
    SideEncoder<To> d;
    d.input = cast_parameter<To>(s.input);
    if (s.has_bias()) d.input_bias = cast_parameter<To>(s.input_bias);
    for (auto [dst, src] : {std::pair{&d.fwd, &s.fwd}, std::pair{&d.bwd, &s.bwd}}) {
      dst->W = cast_parameter<To>(src->W);
      dst->U = cast_parameter<To>(src->U);
      dst->b = cast_parameter<To>(src->b);
    }
    return d;
  };
  out.src = side(p.src);
  out.en = side(p.en);
  return out;
}

}  // namespace pbel::testing
