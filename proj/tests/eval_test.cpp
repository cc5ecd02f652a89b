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
#include <sstream>

#include "pbel/eval/evaluate.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace pbel {
namespace {

using testing::Cipher;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(TestSetIngest, WellFormed) {
  testing::TempDir dir;
  std::ofstream(dir.file("kb.tsv")) << "1\tPoland\tLOC\n2\tWarsaw\tLOC\n";
  std::ofstream(dir.file("t.tsv")) << "Polska\tpl\t1\tLOC\n# comment\nWarszawa\tpl\t2\tLOC\n";
  const auto kb = load_kb(dir.file("kb.tsv"));
  const auto ts = load_test_set(dir.file("t.tsv"), &kb);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts.records[1], (TestRecord{"Warszawa", "pl", 2, EntityType::kLoc}));
  save_test_set(ts, dir.file("again.tsv"));
  EXPECT_EQ(load_test_set(dir.file("again.tsv")).records, ts.records);
}

TEST(TestSetIngest, GoldAbsentFromKbIsRejected) {
  testing::TempDir dir;
  std::ofstream(dir.file("kb.tsv")) << "1\tPoland\tLOC\n";
  std::ofstream(dir.file("t.tsv")) << "Polska\tpl\t1\tLOC\nBerlin\tpl\t9\tLOC\n";
  const auto kb = load_kb(dir.file("kb.tsv"));
  try {
    load_test_set(dir.file("t.tsv"), &kb);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("not in the knowledge base"), std::string::npos);
  }
  EXPECT_NO_THROW(load_test_set(dir.file("t.tsv")));
}

TEST(TestSetIngest, MalformedRecords) {
  testing::TempDir dir;
  auto load = [&](const std::string& body) {
    std::ofstream(dir.file("t.tsv")) << body;
    return load_test_set(dir.file("t.tsv"));
  };
  EXPECT_THROW(load("a\tpl\t1\n"), ParseError);
  EXPECT_THROW(load("a\tpl\t1\tCITY\n"), ParseError);
  EXPECT_THROW(load("a\tpl\t-3\tLOC\n"), ParseError);
  EXPECT_THROW(load("\tpl\t1\tLOC\n"), ParseError);
  EXPECT_THROW(load_test_set(dir.file("missing.tsv")), IoError);
}

std::vector<Outcome> random_outcomes(nn::Rng& rng, std::size_t n, std::size_t kb) {
  std::vector<Outcome> out(n);
  for (auto& o : out) {
    o.type = static_cast<EntityType>(rng.below(3));
    o.covered = rng.below(2);
    o.gold_rank = 1 + rng.below(kb);
    o.correct = *o.gold_rank == 1;
  }
  return out;
}

TEST(Metrics, LawsHoldOnRandomOutcomes) {
  nn::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t kb = 1 + rng.below(30);
    const auto outcomes = random_outcomes(rng, 1 + rng.below(50), kb);
    const std::vector<std::size_t> ks = {1, 2, 5, 10, 20, 50};
    const auto r = aggregate(outcomes, ks, kb);
    ASSERT_EQ(r.recall.size(), ks.size());
    EXPECT_EQ(r.recall[0].recall, r.overall.accuracy);
    for (std::size_t i = 1; i < r.recall.size(); ++i) {
      EXPECT_GE(r.recall[i].recall, r.recall[i - 1].recall);
    }
    EXPECT_EQ(r.covered.count + r.uncovered.count, outcomes.size());
  }
}

TEST(Metrics, HandCountedExample) {
  std::vector<Outcome> o = {{EntityType::kPer, true, true, 1},
                            {EntityType::kPer, false, false, 3},
                            {EntityType::kLoc, true, false, std::nullopt},
                            {EntityType::kOrg, false, true, 1}};
  const std::vector<std::size_t> ks = {1, 3};
  const auto r = aggregate(o, ks, 10);
  EXPECT_EQ(r.overall.correct, 2u);
  EXPECT_DOUBLE_EQ(r.overall.accuracy, 0.5);
  EXPECT_EQ(r.recall[1].hits, 3u);
  EXPECT_DOUBLE_EQ(r.by_type[static_cast<std::size_t>(EntityType::kPer)].accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.covered.accuracy, 0.5);
  EXPECT_EQ(r.uncovered.count, 2u);
}

TEST(Metrics, ViolationsAreDetected) {
  nn::Rng rng(1);
  const auto outcomes = random_outcomes(rng, 20, 5);
  const std::vector<std::size_t> ks = {1, 5};
  const auto good = aggregate(outcomes, ks, 5);
  auto bad = good;
  bad.recall[0].recall += 0.05;
  EXPECT_THROW(check_metric_laws(bad), InvariantError);
  bad = good;
  bad.recall[1].recall = bad.recall[0].recall - 0.01;
  EXPECT_THROW(check_metric_laws(bad), InvariantError);
  bad = good;
  ++bad.covered.count;
  EXPECT_THROW(check_metric_laws(bad), InvariantError);
  // A k at or beyond the KB size must reach every gold entry.
  std::vector<Outcome> missing = {{EntityType::kPer, false, false, std::nullopt}};
  EXPECT_THROW(aggregate(missing, ks, 5), InvariantError);
}

EvalReport sample_report(bool with_candidates) {
  nn::Rng rng(3);
  const auto outcomes = random_outcomes(rng, 17, 9);
  const std::vector<std::size_t> ks = {1, 2, 5, 9};
  auto r = aggregate(outcomes, ks, 9);
  r.system = "pbel";
  r.mode = "pivot";
  r.repr = "grapheme";
  r.seed = 42;
  if (with_candidates) {
    r.candidates.push_back({"Polska", 1, 1, {{1, 0.9123456789012345}, {4, -0.25}}});
    r.candidates.push_back({"x", 2, std::nullopt, {}});
  }
  return r;
}

TEST(Report, JsonRoundTrip) {
  for (bool cands : {false, true}) {
    const auto r = sample_report(cands);
    const auto text = report_to_json(r).dump();
    EXPECT_EQ(report_from_json(nlohmann::json::parse(text)), r);
  }
  testing::TempDir dir;
  const auto r = sample_report(true);
  emit_report(r, dir.file("r.json"), ReportFormat::kJson);
  EXPECT_EQ(load_report(dir.file("r.json")), r);
}

TEST(Report, TsvHasOneRecallRowPerK) {
  const auto tsv = report_to_tsv(sample_report(false));
  const auto start = tsv.find("# recall\n");
  const auto end = tsv.find("# by_type\n");
  ASSERT_NE(start, std::string::npos);
  const auto block = tsv.substr(start, end - start);
  EXPECT_EQ(std::count(block.begin(), block.end(), '\n'), 2 + 4);
  EXPECT_NE(block.find("\n9\t"), std::string::npos);
}

TEST(Report, RenderingIsStable) {
  const auto a = sample_report(true);
  const auto b = sample_report(true);
  EXPECT_EQ(render_report(a, ReportFormat::kJson), render_report(b, ReportFormat::kJson));
  EXPECT_EQ(render_report(a, ReportFormat::kTsv), render_report(b, ReportFormat::kTsv));
}

// Trained cipher model over a KB whose even entries carry the cipher title.
struct Fixture {
  Cipher cipher{21};
  std::vector<std::string> titles;
  KnowledgeBase kb;
  std::shared_ptr<const EncoderParams<float>> params;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture f;
    nn::Rng rng(99);
    f.titles = testing::distinct_titles(rng, 80);
    ParallelTitleCorpus corpus("xx");
    for (std::size_t i = 0; i < f.titles.size(); ++i) {
      KbEntry e{10 + i, f.titles[i], static_cast<EntityType>(i % 3), {}};
      if (i % 2 == 0) e.pivots["xx"] = f.cipher(f.titles[i]);
      f.kb.add(e);
      corpus.add(f.cipher(f.titles[i]), f.titles[i]);
    }
    TrainingConfig cfg;
    cfg.dims = {16, 32};
    cfg.batch_size = 16;
    cfg.max_epochs = 15;
    cfg.learning_rate = 5e-3;
    cfg.seed = 3;
    f.params = std::make_shared<const EncoderParams<float>>(train(cfg, corpus).params);
    return f;
  }();
  return f;
}

TestSet cipher_test(const Fixture& f) {
  TestSet ts;
  for (std::size_t i = 0; i < f.titles.size(); ++i) {
    ts.records.push_back({f.cipher(f.titles[i]), "xx", 10 + i, static_cast<EntityType>(i % 3)});
  }
  return ts;
}

Ranker model_ranker(const PivotModel& m, LinkMode mode) {
  return [&m, mode](const TestRecord& r, std::size_t k) { return m.topk(r.mention, k, mode); };
}

TEST(Evaluate, MentionsEqualToPivotTitlesScorePerfectly) {
  const auto& f = fixture();
  PivotModel m(*f.params, build_index(*f.params, f.kb));
  TestSet ts;
  for (const auto& e : f.kb.entries()) {
    if (e.pivot("xx")) ts.records.push_back({*e.pivot("xx"), "xx", e.id, *e.type});
  }
  EvalOptions opt;
  opt.ks = {1, 5, 80};
  opt.pivot_langs = {"xx"};
  const auto r = evaluate_records(ts, f.kb, model_ranker(m, LinkMode::kPivot), opt);
  EXPECT_EQ(r.overall.accuracy, 1.0);
  EXPECT_EQ(r.recall.back().recall, 1.0);
  EXPECT_EQ(r.covered.count, ts.size());
}

TEST(Evaluate, PivotModeNotWorseOnCoveredSplit) {
  const auto& f = fixture();
  PivotModel m(*f.params, build_index(*f.params, f.kb));
  EvalOptions opt;
  opt.ks = {1, 10, 100};
  opt.pivot_langs = {"xx"};
  const auto ts = cipher_test(f);
  const auto direct = evaluate_records(ts, f.kb, model_ranker(m, LinkMode::kDirect), opt);
  const auto pivot = evaluate_records(ts, f.kb, model_ranker(m, LinkMode::kPivot), opt);
  EXPECT_EQ(pivot.covered.count, 40u);
  EXPECT_GE(pivot.covered.accuracy, direct.covered.accuracy);
  EXPECT_EQ(pivot.covered.accuracy, 1.0);
  // k = 100 exceeds the KB, so every gold entry is retrieved.
  EXPECT_EQ(direct.recall.back().recall, 1.0);
}

TEST(Evaluate, InvariantToRecordOrderAndThreads) {
  const auto& f = fixture();
  PivotModel m(*f.params, build_index(*f.params, f.kb));
  EvalOptions opt;
  opt.ks = {1, 3, 10};
  opt.pivot_langs = {"xx"};
  auto ts = cipher_test(f);
  const auto base = evaluate_records(ts, f.kb, model_ranker(m, LinkMode::kPivot), opt);
  nn::Rng rng(5);
  rng.shuffle(ts.records);
  opt.threads = 3;
  const auto shuffled = evaluate_records(ts, f.kb, model_ranker(m, LinkMode::kPivot), opt);
  EXPECT_EQ(shuffled, base);
}

TEST(Evaluate, AbstentionCountsAsIncorrect) {
  KnowledgeBase kb({{1, "Poland", EntityType::kLoc, {}}, {2, "Warsaw", EntityType::kLoc, {}}});
  TestSet ts;
  ts.records = {{"poland", "pl", 1, EntityType::kLoc}, {"Warszawa", "pl", 2, EntityType::kLoc}};
  EvalOptions opt;
  opt.ranked = false;
  const ExactMatcher exact(kb);
  const auto r = evaluate_records(
      ts, kb,
      [&](const TestRecord& rec, std::size_t) -> std::vector<Candidate> {
        const auto id = exact.link(rec.mention);
        return id ? std::vector<Candidate>{{*id, 1.0}} : std::vector<Candidate>{};
      },
      opt);
  EXPECT_EQ(r.overall.count, 2u);
  EXPECT_EQ(r.overall.correct, 1u);
  EXPECT_TRUE(r.recall.empty());
}

TEST(Manifest, ParsesAndResolvesRelativePaths) {
  const auto m = parse_run_manifest(nlohmann::json::parse(R"({
    "system": "pbel", "mode": "multi", "weighting": "phylo",
    "pivots": [{"lang": "hi", "checkpoint": "hi.pbel"}, {"checkpoint": "/abs/mr.pbel"}],
    "kb": "kb.tsv", "test": "../t.tsv", "k": [1, 5], "format": "tsv"})"),
                                    "/data/run");
  EXPECT_EQ(m.mode, RunMode::kMulti);
  EXPECT_EQ(m.weighting, Weighting::kPhylo);
  EXPECT_EQ(m.pivots[0].checkpoint, "/data/run/hi.pbel");
  EXPECT_EQ(m.pivots[1].checkpoint, "/abs/mr.pbel");
  EXPECT_EQ(m.test, "/data/t.tsv");
  EXPECT_EQ(m.ks, (std::vector<std::size_t>{1, 5}));
  EXPECT_EQ(m.format, ReportFormat::kTsv);
}

TEST(Manifest, RejectsUnknownKeysAndBadValues) {
  auto parse = [](const char* s) { return parse_run_manifest(nlohmann::json::parse(s)); };
  EXPECT_THROW(parse(R"({"kb": "a", "tset": "b"})"), FormatError);
  EXPECT_THROW(parse(R"({"mode": "sideways"})"), InvalidArgument);
  EXPECT_THROW(parse(R"({"k": "five"})"), FormatError);
  EXPECT_THROW(load_run_manifest("/nonexistent/run.json"), IoError);
}

TEST(Manifest, ValidateChecksFilesBeforeRunning) {
  testing::TempDir dir;
  std::ofstream(dir.file("kb.tsv")) << "1\tA\tLOC\n";
  std::ofstream(dir.file("t.tsv")) << "a\tx\t1\tLOC\n";
  RunManifest m;
  m.system = System::kExact;
  m.kb = dir.file("kb.tsv");
  m.test = dir.file("t.tsv");
  EXPECT_NO_THROW(m.validate());
  m.ks = {5, 1};
  EXPECT_THROW(m.validate(), InvalidArgument);
  m.ks = {1};
  m.system = System::kPbel;
  EXPECT_THROW(m.validate(), InvalidArgument);
  m.pivots = {{"", dir.file("nope.pbel"), ""}};
  EXPECT_THROW(m.validate(), IoError);
}

TEST(TrainManifest, SweepExpandsOneJobPerSize) {
  const auto m = parse_train_manifest(nlohmann::json::parse(R"({
    "corpus": "hi.tsv", "output": "out/model.pbel", "extra_corpus": "mr.tsv",
    "extra_sizes": [10, 2500], "hidden_dim": 32, "seed": 9})"),
                                      "/w");
  const auto jobs = m.expand();
  ASSERT_EQ(jobs.size(), 2u);
  EXPECT_EQ(jobs[0].output, "/w/out/model.extra10.pbel");
  EXPECT_EQ(jobs[1].extra_size, 2500u);
  EXPECT_EQ(jobs[1].config.dims.hidden, 32u);
  EXPECT_EQ(jobs[1].config.seed, 9u);
  EXPECT_THROW(parse_train_manifest(nlohmann::json::parse(R"({"corpus": "a", "output": "b",
                                                             "extra_sizes": [1]})")),
               InvalidArgument);
  EXPECT_THROW(parse_train_manifest(nlohmann::json::parse(R"({"corpus": "a", "output": "b",
                                                             "batch_size": 1})")),
               InvalidArgument);
}

TEST(EvaluateManifest, EndToEndIsByteIdenticalAcrossRuns) {
  const auto& f = fixture();
  testing::TempDir dir;
  save_kb(f.kb, dir.file("kb.tsv"));
  save_test_set(cipher_test(f), dir.file("test.tsv"));
  save_checkpoint(*f.params, dir.file("xx.pbel"));
  std::ofstream(dir.file("run.json")) << R"({"system": "pbel", "mode": "pivot",
      "pivots": [{"checkpoint": "xx.pbel", "index": "xx.pbix"}],
      "kb": "kb.tsv", "test": "test.tsv", "k": [1, 5, 80], "output": "report.json",
      "dump_candidates": true})";
  const auto m = load_run_manifest(dir.file("run.json"));
  const auto first = evaluate(m);
  const auto bytes = slurp(dir.file("report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir.file("xx.pbix")));
  const auto second = evaluate(m);  // now reads the index cache
  EXPECT_EQ(second, first);
  EXPECT_EQ(slurp(dir.file("report.json")), bytes);
  EXPECT_EQ(first.system, "pbel");
  EXPECT_EQ(first.candidates.size(), f.titles.size());
  EXPECT_EQ(first.candidates[0].ranked.size(), 80u);
  EXPECT_EQ(first.covered.count, 40u);
}

TEST(EvaluateManifest, StaleIndexCacheIsRejected) {
  const auto& f = fixture();
  testing::TempDir dir;
  save_kb(f.kb, dir.file("kb.tsv"));
  save_test_set(cipher_test(f), dir.file("test.tsv"));
  save_checkpoint(*f.params, dir.file("xx.pbel"));
  KnowledgeBase other({{10, "Other", EntityType::kPer, {}}});
  save_index(build_index(*f.params, other), dir.file("stale.pbix"));
  RunManifest m;
  m.kb = dir.file("kb.tsv");
  m.test = dir.file("test.tsv");
  m.pivots = {{"", dir.file("xx.pbel"), dir.file("stale.pbix")}};
  EXPECT_THROW(evaluate(m), IndexMismatchError);
  m.repr = ReprKind::kPhoneme;
  m.pivots[0].index.clear();
  EXPECT_THROW(evaluate(m), KindMismatchError);
}

TEST(EvaluateManifest, BaselineSystems) {
  testing::TempDir dir;
  std::ofstream(dir.file("kb.tsv")) << "1\tNew Delhi\tLOC\thi=नई दिल्ली\n2\tRiver\tLOC\n";
  std::ofstream(dir.file("t.tsv")) << "new delhi\tmr\t1\tLOC\nनई दिल्ली\tmr\t1\tLOC\n"
                                   << "nadi\tmr\t2\tLOC\n";
  std::ofstream(dir.file("lex.tsv")) << "nadi\triver\t0.9\n";
  RunManifest m;
  m.kb = dir.file("kb.tsv");
  m.test = dir.file("t.tsv");
  m.system = System::kExact;
  EXPECT_EQ(evaluate(m).overall.correct, 1u);
  m.system = System::kExactPivot;
  m.pivot_langs = {"hi"};
  const auto piv = evaluate(m);
  EXPECT_EQ(piv.overall.correct, 2u);
  EXPECT_EQ(piv.covered.count, 2u);
  m.system = System::kTranslate;
  m.lexicon = dir.file("lex.tsv");
  const auto tr = evaluate(m);
  EXPECT_EQ(tr.overall.correct, 2u);
  EXPECT_EQ(tr.mode, "-");
  EXPECT_TRUE(tr.recall.empty());
}

}  // namespace
}  // namespace pbel
