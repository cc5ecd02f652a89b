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

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pbel/baselines/translate.hpp"
#include "pbel/eval/manifest.hpp"
#include "pbel/eval/testset.hpp"
#include "pbel/linker/index_cache.hpp"

namespace pbel {

// Ranked answer for one record, best first, at most `k` long. An empty list
// means the system abstained ("none"), which counts as incorrect.
using Ranker = std::function<std::vector<Candidate>(const TestRecord&, std::size_t k)>;

struct EvalOptions {
  std::vector<std::size_t> ks = {1};
  bool ranked = true;  // false: single-answer system, no recall block
  std::size_t threads = 1;
  bool dump_candidates = false;
  std::vector<std::string> pivot_langs;  // coverage: gold has a title in one of these
};

// Runs `rank` over every record (concurrently when threads > 1) and
// aggregates the report. Counts are integers summed per record, so the
// metrics do not depend on record order or thread count.
inline EvalReport evaluate_records(const TestSet& test, const KnowledgeBase& kb,
                                   const Ranker& rank, const EvalOptions& opt) {
  if (test.empty()) throw EmptyInputError("evaluate: empty test set");
  if (kb.empty()) throw EmptyInputError("evaluate: empty knowledge base");
  test.check_against(kb);
  if (opt.ranked && opt.ks.empty()) throw InvalidArgument("evaluate: empty k list");
  const std::size_t depth = opt.ranked ? std::min(opt.ks.back(), kb.size()) : 1;

  std::vector<Outcome> outcomes(test.size());
  std::vector<MentionResult> results(opt.dump_candidates ? test.size() : 0);
  parallel_chunks(test.size(), opt.threads, [&](std::size_t i) {
    const auto& rec = test.records[i];
    auto ranked = rank(rec, depth);
    if (ranked.size() > depth) ranked.resize(depth);
    Outcome& o = outcomes[i];
    o.type = rec.type;
    const auto& gold = *kb.find(rec.gold);
    o.covered = std::any_of(opt.pivot_langs.begin(), opt.pivot_langs.end(),
                            [&](const std::string& l) { return gold.pivot(l) != nullptr; });
    o.correct = !ranked.empty() && ranked.front().id == rec.gold;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      if (ranked[r].id == rec.gold) {
        o.gold_rank = r + 1;
        break;
      }
    }
    if (opt.dump_candidates) {
      auto& m = results[i];
      m.mention = rec.mention;
      m.gold = rec.gold;
      if (!ranked.empty()) m.predicted = ranked.front().id;
      m.ranked = std::move(ranked);
    }
  });
  const std::vector<std::size_t> no_ks;
  EvalReport report = aggregate(outcomes, opt.ranked ? opt.ks : no_ks, kb.size());
  report.candidates = std::move(results);
  return report;
}

// Every input a manifest references, loaded and cross-checked up front.
class LoadedRun {
 public:
  explicit LoadedRun(RunManifest manifest) : m_(std::move(manifest)) {
    m_.validate();
    kb_ = load_kb(m_.kb);
    test_ = load_test_set(m_.test, &kb_);
    if (test_.empty()) throw EmptyInputError("test set " + m_.test + " has no records");
    if (!m_.features.empty()) {
      table_ = std::make_shared<const FeatureTable>(FeatureTable::load(m_.features));
    }
    if (!m_.phylo.empty()) phylo_ = PhyloWeights::load(m_.phylo);
    switch (m_.system) {
      case System::kPbel: load_models(); break;
      case System::kTranslate: lexicon_ = load_lexicon(m_.lexicon); break;
      case System::kExact:
      case System::kExactPivot: break;
    }
  }

  const RunManifest& manifest() const { return m_; }
  const KnowledgeBase& kb() const { return kb_; }
  const TestSet& test() const { return test_; }
  const std::vector<std::unique_ptr<PivotModel>>& models() const { return models_; }

  EvalReport evaluate() const {
    EvalOptions opt;
    opt.ks = m_.ks;
    opt.threads = m_.threads;
    opt.dump_candidates = m_.dump_candidates;
    opt.pivot_langs = m_.pivot_langs;
    EvalReport report;
    switch (m_.system) {
      case System::kPbel: {
        for (const auto& model : models_) {
          if (std::find(opt.pivot_langs.begin(), opt.pivot_langs.end(), model->pivot_lang()) ==
              opt.pivot_langs.end()) {
            opt.pivot_langs.push_back(model->pivot_lang());
          }
        }
        report = evaluate_records(test_, kb_, pbel_ranker(), opt);
        report.repr = to_string(models_.front()->params().kind);
        break;
      }
      case System::kExact:
      case System::kExactPivot: {
        opt.ranked = false;
        const ExactMatcher matcher(
            kb_, m_.system == System::kExactPivot ? m_.pivot_langs : std::vector<std::string>{});
        report = evaluate_records(test_, kb_, single_answer([&](const std::string& s) {
                                    return matcher.link(s);
                                  }),
                                  opt);
        report.repr = "surface";
        break;
      }
      case System::kTranslate: {
        opt.ranked = false;
        const ExactMatcher matcher(kb_);
        report = evaluate_records(test_, kb_, single_answer([&](const std::string& s) {
                                    return translate_link(s, lexicon_, matcher);
                                  }),
                                  opt);
        report.repr = "surface";
        break;
      }
    }
    report.system = to_string(m_.system);
    report.mode = m_.system != System::kPbel ? "-"
                  : m_.mode == RunMode::kMulti
                      ? std::string("multi-") + to_string(m_.weighting)
                      : to_string(m_.mode);
    report.seed = m_.seed;
    return report;
  }

 private:
  template <typename Fn>
  static Ranker single_answer(Fn fn) {
    return [fn](const TestRecord& rec, std::size_t) -> std::vector<Candidate> {
      const auto id = fn(rec.mention);
      if (!id) return {};
      return {Candidate{*id, 1.0}};
    };
  }

  Ranker pbel_ranker() const {
    if (m_.mode != RunMode::kMulti) {
      const auto mode = m_.mode == RunMode::kDirect ? LinkMode::kDirect : LinkMode::kPivot;
      const PivotModel* model = models_.front().get();
      return [model, mode](const TestRecord& rec, std::size_t k) {
        return model->topk(rec.mention, k, mode);
      };
    }
    std::vector<const PivotModel*> ptrs;
    for (const auto& model : models_) ptrs.push_back(model.get());
    // Weights per source language, fixed before any record is scored.
    std::map<std::string, std::vector<double>> weights;
    for (const auto& rec : test_.records) {
      if (weights.count(rec.lang)) continue;
      weights[rec.lang] = m_.weighting == Weighting::kPhylo
                              ? phylo_weights(ptrs, phylo_, rec.lang)
                              : uniform_weights(ptrs.size());
    }
    return [ptrs, weights](const TestRecord& rec, std::size_t k) {
      return multi_pivot_topk(ptrs, weights.at(rec.lang), rec.mention, k, LinkMode::kPivot);
    };
  }

  void load_models() {
    for (const auto& spec : m_.pivots) {
      auto params = load_checkpoint(spec.checkpoint, m_.repr);
      if (params.kind != ReprKind::kGrapheme && !table_) {
        throw InvalidArgument("manifest: " + spec.checkpoint + " is a " +
                              to_string(params.kind) + " model; set \"features\"");
      }
      const std::string lang = spec.lang.empty() ? params.src_lang : spec.lang;
      std::optional<KbIndex> index;
      if (!spec.index.empty() && std::filesystem::exists(spec.index)) {
        index = load_index(spec.index,
                           {params.kind, params_fingerprint(params), kb_.fingerprint()});
        if (index->pivot_lang != lang) {
          throw IndexMismatchError(spec.index + ": indexes pivot language '" +
                                   index->pivot_lang + "', expected '" + lang + "'");
        }
      } else {
        index = build_index(params, kb_, table_.get(), lang, {m_.batch_size, m_.threads});
        if (!spec.index.empty()) save_index(*index, spec.index);
      }
      models_.push_back(std::make_unique<PivotModel>(std::move(params), std::move(*index), table_));
    }
    const auto kind = models_.front()->params().kind;
    for (const auto& model : models_) {
      if (model->params().kind != kind) {
        throw KindMismatchError("manifest: pivot models use different representation kinds");
      }
    }
  }

  RunManifest m_;
  KnowledgeBase kb_;
  TestSet test_;
  std::shared_ptr<const FeatureTable> table_;
  PhyloWeights phylo_;
  AlignmentLexicon lexicon_;
  std::vector<std::unique_ptr<PivotModel>> models_;
};

// Runs a manifest end to end. The report is written when the manifest names
// an output path.
inline EvalReport evaluate(const RunManifest& manifest) {
  const LoadedRun run(manifest);
  EvalReport report = run.evaluate();
  if (!manifest.output.empty()) emit_report(report, manifest.output, manifest.format);
  return report;
}

}  // namespace pbel
