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

#include <gtest/gtest.h>

#include <fstream>

#include "pbel/baselines/translate.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace pbel {
namespace {

KnowledgeBase small_kb() {
  return KnowledgeBase({{1, "Poland", EntityType::kLoc, {{"hi", "पोलैंड"}}},
                        {2, "New Delhi", EntityType::kLoc, {}},
                        {3, "Straße", {}, {}},
                        {4, "Warsaw", EntityType::kLoc, {{"hi", "वारसॉ"}}}});
}

TEST(ExactLink, IdentityAndCaseFold) {
  const auto kb = small_kb();
  EXPECT_EQ(exact_link("Poland", kb), 1u);
  EXPECT_EQ(exact_link("poland", kb), 1u);
  EXPECT_EQ(exact_link("NEW  DELHI ", kb), 2u);
  EXPECT_EQ(exact_link("STRASSE", kb), 3u);
  EXPECT_FALSE(exact_link("Polska", kb));
}

TEST(ExactLink, NonLatinMentionAgainstLatinKbIsNone) {
  const auto kb = small_kb();
  EXPECT_FALSE(exact_link("पोलैंड", kb));
  EXPECT_FALSE(exact_link("Польша", kb));
}

TEST(ExactLink, PivotVariantMatchesPivotTitles) {
  const auto kb = small_kb();
  EXPECT_EQ(exact_link("पोलैंड", kb, {"hi"}), 1u);
  EXPECT_FALSE(exact_link("पोलैंड", kb, {"mr"}));
}

TEST(ExactLink, NfcEquivalentFormsMatch) {
  KnowledgeBase kb({{7, "Café", {}, {}}});
  EXPECT_EQ(exact_link("Café", kb), 7u);
}

TEST(ExactLink, SharedKeyResolvesToLowestId) {
  KnowledgeBase kb({{9, "Georgia", {}, {}}, {5, "GEORGIA", {}, {}}});
  EXPECT_EQ(exact_link("georgia", kb), 5u);
}

TEST(ExactLink, ReflexiveOnRandomKb) {
  nn::Rng rng(12);
  const auto titles = testing::distinct_titles(rng, 200);
  KnowledgeBase kb;
  for (std::size_t i = 0; i < titles.size(); ++i) kb.add({i * 3 + 1, titles[i], {}, {}});
  const ExactMatcher m(kb);
  for (const auto& e : kb.entries()) {
    const auto got = m.link(e.title);
    ASSERT_TRUE(got);
    EXPECT_EQ(match_key(kb.find(*got)->title), match_key(e.title));
  }
}

// Dense reimplementation of Model 1 EM: full t table over every (src, en)
// word pair, straight from the update equations.
struct DenseModel1 {
  std::vector<std::string> sv{""}, ev;
  std::vector<std::vector<double>> t;
  std::vector<double> ll;

  static std::size_t id(std::vector<std::string>& v, const std::string& w) {
    const auto it = std::find(v.begin(), v.end(), w);
    if (it != v.end()) return static_cast<std::size_t>(it - v.begin());
    v.push_back(w);
    return v.size() - 1;
  }

  DenseModel1(const std::vector<std::pair<std::string, std::string>>& pairs, int iters) {
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> data;
    for (const auto& [s, e] : pairs) {
      std::vector<std::size_t> fs{0}, es;
      for (const auto& w : text::split_whitespace(s)) fs.push_back(id(sv, w));
      for (const auto& w : text::split_whitespace(e)) es.push_back(id(ev, w));
      data.emplace_back(fs, es);
    }
    t.assign(sv.size(), std::vector<double>(ev.size(), 1.0 / static_cast<double>(ev.size())));
    for (int it = 0; it <= iters; ++it) {
      std::vector<std::vector<double>> c(sv.size(), std::vector<double>(ev.size(), 0.0));
      double l = 0.0;
      for (const auto& [fs, es] : data) {
        for (auto e : es) {
          double z = 0.0;
          for (auto f : fs) z += t[f][e];
          l += std::log(z / static_cast<double>(fs.size()));
          for (auto f : fs) c[f][e] += t[f][e] / z;
        }
      }
      ll.push_back(l);
      if (it == iters) break;
      for (std::size_t f = 0; f < sv.size(); ++f) {
        double tot = 0.0;
        for (double x : c[f]) tot += x;
        for (std::size_t e = 0; e < ev.size(); ++e) t[f][e] = c[f][e] / tot;
      }
    }
  }

  double p(const std::string& f, const std::string& e) const {
    const auto fi = std::find(sv.begin(), sv.end(), f) - sv.begin();
    const auto ei = std::find(ev.begin(), ev.end(), e) - ev.begin();
    return t[static_cast<std::size_t>(fi)][static_cast<std::size_t>(ei)];
  }
};

ParallelTitleCorpus toy_corpus() {
  ParallelTitleCorpus c("src");
  c.add("a b", "x y");
  c.add("a c", "x z");
  return c;
}

TEST(Model1, ToyCorpusFrozenValues) {
  const auto r = train_model1(toy_corpus());
  ASSERT_EQ(r.log_likelihood.size(), 6u);
  const double expect[] = {-4.394449154672439, -3.58351893845611, -3.4708354305893243,
                           -3.367914878903053, -3.2791808890058514, -3.2065703019984397};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(r.log_likelihood[i], expect[i], 1e-12);
  const auto* a = r.lexicon.lookup("a");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->front().en, "x");
  EXPECT_NEAR(a->front().p, 0.755608028335301, 1e-12);
  EXPECT_EQ(r.lexicon.best("a"), "x");
}

TEST(Model1, MatchesDenseOracleOnRandomCorpus) {
  nn::Rng rng(31);
  std::vector<std::pair<std::string, std::string>> pairs;
  ParallelTitleCorpus corpus("src");
  for (int i = 0; i < 40; ++i) {
    std::string s, e;
    const auto n = 1 + rng.below(3);
    for (std::size_t k = 0; k < n; ++k) {
      const auto w = rng.below(8);
      s += (k ? " " : "") + std::string("s") + std::to_string(w);
      e += (k ? " " : "") + std::string("e") + std::to_string((w + rng.below(2)) % 8);
    }
    if (corpus.add(s, e)) pairs.emplace_back(s, e);
  }
  const DenseModel1 oracle(pairs, 7);
  const auto r = train_model1(corpus, {7, 100, 0.0});
  ASSERT_EQ(r.log_likelihood.size(), oracle.ll.size());
  for (std::size_t i = 0; i < oracle.ll.size(); ++i) {
    EXPECT_NEAR(r.log_likelihood[i], oracle.ll[i], 1e-9 * std::abs(oracle.ll[i]));
  }
  for (const auto& [src, ts] : r.lexicon.entries()) {
    for (const auto& t : ts) EXPECT_NEAR(t.p, oracle.p(src, t.en), 1e-12) << src << " " << t.en;
  }
}

TEST(Model1, LikelihoodNonDecreasingOnRandomCorpora) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    nn::Rng rng(seed);
    ParallelTitleCorpus c("src");
    for (int i = 0; i < 30; ++i) c.add(testing::random_title(rng), testing::random_title(rng));
    const auto r = train_model1(c, {10});
    for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
      EXPECT_GE(r.log_likelihood[i], r.log_likelihood[i - 1] - 1e-9);
    }
  }
}

TEST(Model1, DegenerateIdenticalPairs) {
  ParallelTitleCorpus c("src");
  c.add("x", "x");
  const auto r = train_model1(c);
  EXPECT_EQ(r.lexicon.best("x"), "x");
  EXPECT_NEAR(r.lexicon.lookup("x")->front().p, 1.0, 1e-12);
}

TEST(Model1, LexiconLaws) {
  nn::Rng rng(3);
  ParallelTitleCorpus c("src");
  for (int i = 0; i < 50; ++i) c.add(testing::random_title(rng), testing::random_title(rng));
  const auto r = train_model1(c);
  for (const auto& [src, ts] : r.lexicon.entries()) {
    ASSERT_FALSE(ts.empty());
    EXPECT_LE(ts.size(), 3u);
    double sum = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      EXPECT_GE(ts[i].p, 0.05);
      if (i) {
        EXPECT_GE(ts[i - 1].p, ts[i].p);
      }
      sum += ts[i].p;
    }
    EXPECT_LE(sum, 1.0 + 1e-6);
  }
}

TEST(Model1, EmptyCorpusThrows) {
  EXPECT_THROW(train_model1(ParallelTitleCorpus("src")), EmptyInputError);
}

TEST(Lexicon, RoundTripIsExact) {
  nn::Rng rng(4);
  ParallelTitleCorpus c("src");
  for (int i = 0; i < 20; ++i) c.add(testing::random_title(rng), testing::random_title(rng));
  const auto lex = train_model1(c).lexicon;
  testing::TempDir dir;
  save_lexicon(lex, dir.file("lex.tsv"));
  EXPECT_EQ(load_lexicon(dir.file("lex.tsv")), lex);
}

TEST(Lexicon, RejectsBadFiles) {
  testing::TempDir dir;
  auto load = [&](const std::string& body) {
    std::ofstream(dir.file("l.tsv")) << body;
    return load_lexicon(dir.file("l.tsv"));
  };
  EXPECT_THROW(load("a\tx\n"), ParseError);
  EXPECT_THROW(load("a\tx\thigh\n"), ParseError);
  EXPECT_THROW(load("a\tx\t0.7\na\ty\t0.6\n"), ParseError);
  EXPECT_THROW(load("a\tx\t0.3\na\tx\t0.2\n"), ParseError);
  EXPECT_THROW(load("a\tx\t0\n"), ParseError);
  EXPECT_NO_THROW(load("a\tx\t0.7\na\ty\t0.3\n"));
}

TEST(TranslateLink, TranslatesEachWord) {
  AlignmentLexicon lex;
  lex.set("nayi", {{"new", 0.9}});
  lex.set("dilli", {{"delhi", 0.8}, {"dilly", 0.1}});
  const auto kb = small_kb();
  EXPECT_EQ(translate_title("Nayi Dilli", lex), "new delhi");
  EXPECT_EQ(translate_link("Nayi Dilli", lex, kb), 2u);
  EXPECT_FALSE(translate_link("Nayi Shahar", lex, kb));
  EXPECT_EQ(translate_link("Poland", lex, kb), 1u);
}

TEST(TranslateLink, IdentityLexiconEqualsExactLink) {
  nn::Rng rng(5);
  const auto titles = testing::distinct_titles(rng, 60);
  KnowledgeBase kb;
  AlignmentLexicon identity;
  for (std::size_t i = 0; i < titles.size(); ++i) {
    kb.add({i + 1, titles[i], {}, {}});
    for (const auto& w : text::split_whitespace(text::fold_case(titles[i]))) {
      identity.set(w, {{w, 1.0}});
    }
  }
  const ExactMatcher exact(kb);
  for (int t = 0; t < 200; ++t) {
    const std::string m = t % 2 ? titles[rng.below(titles.size())] : testing::random_title(rng);
    EXPECT_EQ(translate_link(m, identity, exact), exact.link(m)) << m;
  }
}

TEST(TranslateLink, SupervisedAndZeroShotLexiconsCanDisagree) {
  // Same English side, two source languages that spell "river" differently.
  ParallelTitleCorpus lrl("lrl"), hrl("hrl");
  lrl.add("nadi", "river");
  lrl.add("nadi ganga", "river ganga");
  hrl.add("nadi", "stream");
  hrl.add("nadi ganga", "stream ganga");
  KnowledgeBase kb({{1, "River", {}, {}}, {2, "Stream", {}, {}}});
  const auto sup = train_model1(lrl).lexicon;
  const auto zs = train_model1(hrl).lexicon;
  EXPECT_EQ(translate_link("nadi", sup, kb), 1u);
  EXPECT_EQ(translate_link("nadi", zs, kb), 2u);
}

}  // namespace
}  // namespace pbel
