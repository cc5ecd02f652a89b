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

#include "pbel/numerics/random.hpp"
#include "pbel/representation/representation.hpp"
#include "support/temp_dir.hpp"

namespace pbel {
namespace {

const FeatureTable& shipped_table() {
  static const FeatureTable table = FeatureTable::load(PBEL_DATA_DIR "/ipa_features.tsv");
  return table;
}

FeatureTable toy_table(std::initializer_list<const char*> segments) {
  FeatureTable t;
  std::int8_t k = 0;
  for (const char* s : segments) {
    FeatureRow r{};
    r[static_cast<std::size_t>(k++) % kFeatureDim] = 1;
    t.add(s, r);
  }
  return t;
}

TEST(Graphemes, DirectLookup) {
  SymbolVocab v(ReprKind::kGrapheme, {"a", "b"});
  EXPECT_EQ(graphemes("ab", v).ids, (std::vector<std::int32_t>{1, 2}));
}

TEST(Graphemes, UnseenSymbolIsUnk) {
  SymbolVocab v(ReprKind::kGrapheme, {"a", "b"});
  EXPECT_EQ(graphemes("aXb", v).ids, (std::vector<std::int32_t>{1, 0, 2}));
}

TEST(Graphemes, NfcComposesCombiningSequences) {
  SymbolVocab v(ReprKind::kGrapheme, {"é"});
  const auto seq = graphemes("é", v);
  EXPECT_EQ(seq.ids, (std::vector<std::int32_t>{1}));
  EXPECT_EQ(seq.units, (std::vector<std::string>{"é"}));
}

TEST(Graphemes, OneIdPerScalarOutsideLatin) {
  SymbolVocab v(ReprKind::kGrapheme, {});
  EXPECT_EQ(graphemes("पोलैंड", v).length(), 6u);
}

TEST(Graphemes, EmptyAndInvalidInputThrow) {
  SymbolVocab v(ReprKind::kGrapheme, {"a"});
  EXPECT_THROW(graphemes("", v), EmptyInputError);
  EXPECT_THROW(graphemes("a\xff", v), FormatError);
}

TEST(SegmentIpa, LongestMatchWins) {
  auto t = toy_table({"t", "s", "ts"});
  const auto segs = segment_ipa("ts", t);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].text, "ts");
}

TEST(SegmentIpa, SingleSegments) {
  auto t = toy_table({"t", "a"});
  EXPECT_EQ(segment_ipa("ta", t), (std::vector<Segment>{{"t", true}, {"a", true}}));
}

TEST(SegmentIpa, UnknownScalarsFallBackToSingleUnits) {
  auto t = toy_table({"t", "a"});
  EXPECT_EQ(segment_ipa("tqa", t),
            (std::vector<Segment>{{"t", true}, {"q", false}, {"a", true}}));
  SymbolVocab v(ReprKind::kPhoneme, {"a", "t"});
  EXPECT_EQ(phonemes("tqa", t, v).ids, (std::vector<std::int32_t>{2, 0, 1}));
}

TEST(SegmentIpa, ShippedTableCoversPolandTranscriptions) {
  // Marathi, Hindi and English-style transcriptions of the same name.
  for (const char* ipa : {"poːlənɖ", "pɔːlɛːnɖ", "pol̪ən̪d̪", "pəʊlənd", "polʲska"}) {
    const auto segs = segment_ipa(ipa, shipped_table());
    std::size_t unknown = 0;
    for (const auto& s : segs) unknown += s.known ? 0 : 1;
    if (std::string(ipa) == "polʲska") {
      EXPECT_EQ(unknown, 1u) << "palatalization mark is not in the inventory";
    } else {
      EXPECT_EQ(unknown, 0u) << ipa;
    }
  }
  const auto segs = segment_ipa("poːlənɖ", shipped_table());
  std::vector<std::string> texts;
  for (const auto& s : segs) texts.push_back(s.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"p", "oː", "l", "ə", "n", "ɖ"}));
}

TEST(SegmentIpa, MultiScalarSegmentsInShippedTable) {
  for (const char* seg : {"tʃ", "dʒ", "t̪", "d̪", "pʰ", "kʰ", "ɖʱ", "oː", "ɛː", "ts"}) {
    const auto segs = segment_ipa(seg, shipped_table());
    ASSERT_EQ(segs.size(), 1u) << seg;
    EXPECT_TRUE(segs[0].known) << seg;
  }
}

// Segmentation is total and lossless: concatenating the segments gives back
// the NFC input, whatever the input.
TEST(SegmentIpa, ConcatenationReconstructsInput) {
  const auto& table = shipped_table();
  std::vector<std::string> alphabet;
  for (const auto& [seg, row] : table.rows()) {
    for (auto& s : text::scalars(seg)) alphabet.push_back(s);
  }
  alphabet.insert(alphabet.end(), {"Q", "7", "ʲ", " ", "ñ"});
  nn::Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.below(alphabet.size())];
    const auto segs = segment_ipa(s, table);
    std::string joined;
    for (const auto& seg : segs) {
      joined += seg.text;
      EXPECT_EQ(seg.known, table.contains(seg.text));
    }
    EXPECT_EQ(joined, text::nfc(s));
    EXPECT_EQ(segs, segment_ipa(s, table));
  }
}

TEST(Featurize, TableRowAndZeroFallback) {
  const auto& table = shipped_table();
  const auto seq = articulatory("pQ", table);
  ASSERT_EQ(seq.rows.size(), 2u);
  EXPECT_EQ(seq.rows[0], *table.find("p"));
  EXPECT_EQ(seq.rows[1], FeatureRow{});
}

TEST(Featurize, IdenticalRowsForIdenticalSegments) {
  const auto seq = articulatory("tat", shipped_table());
  EXPECT_EQ(seq.rows[0], seq.rows[2]);
}

TEST(Featurize, RequiresPhonemeInput) {
  SymbolVocab v(ReprKind::kGrapheme, {});
  EXPECT_THROW(featurize(graphemes("a", v), shipped_table()), KindMismatchError);
}

TEST(Featurize, RowsAreTernary) {
  for (const auto& [seg, row] : shipped_table().rows()) {
    for (auto v : row) EXPECT_TRUE(v == -1 || v == 0 || v == 1) << seg;
  }
}

TEST(FeatureTable, ShippedTableDistinguishesVoicing) {
  const auto& t = shipped_table();
  EXPECT_NE(*t.find("p"), *t.find("b"));
  EXPECT_EQ((*t.find("p"))[8], -1);
  EXPECT_EQ((*t.find("b"))[8], 1);
  EXPECT_EQ((*t.find("m"))[6], 1);
  EXPECT_EQ((*t.find("a"))[0], 1);
}

TEST(FeatureTable, RejectsMalformedLines) {
  testing::TempDir dir;
  auto write = [&](const std::string& body) {
    std::ofstream(dir.file("t.tsv")) << body;
    return dir.file("t.tsv");
  };
  EXPECT_THROW(FeatureTable::load(write("a\t1,0\n")), ParseError);
  EXPECT_THROW(FeatureTable::load(write("a\t" + std::string(20, '0') + "\n")), ParseError);
  std::string ok = "0";
  for (int i = 1; i < 21; ++i) ok += ",0";
  EXPECT_EQ(FeatureTable::load(write("# c\na\t" + ok + "\n")).size(), 1u);
  try {
    FeatureTable::load(write("a\t" + ok + "\na\t" + ok + "\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  auto bad = ok;
  bad[0] = '2';
  EXPECT_THROW(FeatureTable::load(write("a\t" + bad + "\n")), ParseError);
}

TEST(FeatureTable, SaveLoadRoundTrip) {
  testing::TempDir dir;
  shipped_table().save(dir.file("t.tsv"));
  const auto back = FeatureTable::load(dir.file("t.tsv"));
  EXPECT_EQ(back.rows(), shipped_table().rows());
  EXPECT_EQ(back.fingerprint(), shipped_table().fingerprint());
}

TEST(BuildVocab, SeparateSides) {
  ParallelTitleCorpus c("hi");
  c.add("ab", "cd");
  auto [src, en] = build_vocab(c, ReprKind::kGrapheme);
  EXPECT_EQ(src.symbols(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(en.symbols(), (std::vector<std::string>{"c", "d"}));
}

TEST(BuildVocab, EmptyCorpusThrows) {
  EXPECT_THROW(build_vocab(ParallelTitleCorpus("hi"), ReprKind::kGrapheme), EmptyInputError);
}

TEST(BuildVocab, IndependentOfCorpusOrder) {
  std::vector<TitlePair> pairs = {{"Πολωνία", "Poland"}, {"Ελλάδα", "Greece"},
                                  {"Κύπρος", "Cyprus"},  {"Ιταλία", "Italy"},
                                  {"Γαλλία", "France"},  {"Ισπανία", "Spain"}};
  auto build = [&] {
    ParallelTitleCorpus c("el");
    for (const auto& p : pairs) c.add(p.src, p.en);
    return build_vocab(c, ReprKind::kGrapheme);
  };
  const auto first = build();
  EXPECT_EQ(first, build());
  nn::Rng rng(12);
  for (int i = 0; i < 10; ++i) {
    rng.shuffle(pairs);
    EXPECT_EQ(build(), first);
  }
}

TEST(BuildVocab, PhonemeVocabHoldsOnlyKnownSegments) {
  ParallelTitleCorpus c("hi");
  c.add("tʃaʲ", "tʃa");
  auto [src, en] = build_vocab(c, ReprKind::kPhoneme, &shipped_table());
  EXPECT_EQ(src.symbols(), (std::vector<std::string>{"a", "tʃ"}));
}

TEST(SymbolVocab, BijectionAndRoundTrip) {
  auto v = SymbolVocab::from_symbols(ReprKind::kGrapheme, {"z", "é", "a", "a", "ж"});
  ASSERT_EQ(v.size(), 4u);
  for (std::int32_t id = 1; id <= 4; ++id) EXPECT_EQ(v.lookup(v.symbol(id)), id);
  EXPECT_EQ(v.lookup("nope"), SymbolVocab::kUnk);
  EXPECT_THROW(v.symbol(0), InvalidArgument);
  testing::TempDir dir;
  v.save(dir.file("v.txt"));
  EXPECT_EQ(SymbolVocab::load(dir.file("v.txt"), ReprKind::kGrapheme), v);
  EXPECT_THROW(SymbolVocab(ReprKind::kGrapheme, {"a", "a"}), InvalidArgument);
}

TEST(Represent, DispatchesOnKind) {
  SymbolVocab g(ReprKind::kGrapheme, {"t"});
  SymbolVocab p(ReprKind::kPhoneme, {"tʃ"});
  EXPECT_EQ(represent("tʃ", ReprKind::kGrapheme, g, nullptr).ids,
            (std::vector<std::int32_t>{1, 0}));
  EXPECT_EQ(represent("tʃ", ReprKind::kPhoneme, p, &shipped_table()).ids,
            (std::vector<std::int32_t>{1}));
  EXPECT_EQ(represent("tʃ", ReprKind::kArticulatory, p, &shipped_table()).rows.size(), 1u);
  EXPECT_THROW(represent("tʃ", ReprKind::kPhoneme, p, nullptr), InvalidArgument);
}

TEST(Unicode, FoldCaseBeyondAscii) {
  EXPECT_EQ(text::fold_case("Straße"), text::fold_case("STRASSE"));
  EXPECT_EQ(text::fold_case("ΠΟΛΩΝΊΑ"), text::fold_case("πολωνία"));
}

TEST(Corpus, DedupesAndRejectsEmptySides) {
  ParallelTitleCorpus c("hi");
  EXPECT_TRUE(c.add("a", "b"));
  EXPECT_FALSE(c.add("a", "b"));
  EXPECT_EQ(c.size(), 1u);
  EXPECT_THROW(c.add("", "b"), InvalidArgument);
}

TEST(Corpus, LoadReportsLineNumbers) {
  testing::TempDir dir;
  std::ofstream(dir.file("c.tsv")) << "a\tb\n\nc\n";
  try {
    load_corpus(dir.file("c.tsv"), "hi");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("c.tsv:3:"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace pbel
