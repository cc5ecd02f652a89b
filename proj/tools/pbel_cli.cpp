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

// Command-line front end over the pbel library. Failures print one `error: <category>: <message>` line to
// stderr; usage errors exit 2, runtime errors exit 1.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pbel/pbel.hpp"

namespace {

// Usage problems detected after parsing (e.g. a missing config file).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string require_config(const std::string& path, const char* sub) {
  if (path.empty()) throw UsageError(std::string(sub) + " needs --config <manifest>");
  if (!std::filesystem::is_regular_file(path)) {
    throw UsageError("config file not found: " + path);
  }
  return path;
}

std::shared_ptr<const pbel::FeatureTable> maybe_table(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const pbel::FeatureTable>(pbel::FeatureTable::load(path));
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
};

int run_train(const Globals& g) {
  auto manifest = pbel::load_train_manifest(require_config(g.config, "train"));
  if (g.seed) manifest.base.config.seed = *g.seed;
  const auto table = maybe_table(manifest.base.features);
  const auto corpus = pbel::load_corpus(manifest.base.corpus, manifest.base.src_lang);
  std::optional<pbel::ParallelTitleCorpus> extra_all;
  if (!manifest.base.extra_corpus.empty()) {
    extra_all = pbel::load_corpus(manifest.base.extra_corpus, corpus.src_lang());
  }
  for (const auto& job : manifest.expand()) {
    std::vector<pbel::ParallelTitleCorpus> extra;
    if (extra_all) {
      extra.push_back(job.extra_size ? extra_all->head(*job.extra_size) : *extra_all);
      extra.back().set_src_lang(corpus.src_lang());
    }
    const auto result = pbel::train(job.config, corpus, extra, table.get(),
                                    [](const pbel::EpochStats& s) {
                                      std::cerr << "epoch " << s.epoch << " loss " << s.mean_loss
                                                << " dev_acc " << s.dev_accuracy << '\n';
                                    });
    std::filesystem::path out(job.output);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    pbel::save_checkpoint(result.params, job.output);
    std::cout << job.output << "\tbest_epoch=" << result.best_epoch
              << "\tdev_accuracy=" << result.best_dev_accuracy << '\n';
  }
  return 0;
}

struct IndexArgs {
  std::string checkpoint, kb, features, index, pivot_lang;
  std::size_t threads = 1;
  std::size_t batch_size = 64;
};

void add_index_args(CLI::App* sub, IndexArgs& a, bool index_required) {
  sub->add_option("--checkpoint", a.checkpoint, "Encoder checkpoint")->required();
  sub->add_option("--kb", a.kb, "Knowledge base TSV")->required();
  sub->add_option("--features", a.features, "IPA feature table (phoneme/articulatory models)");
  auto* idx = sub->add_option("--index", a.index, "Index cache file");
  if (index_required) idx->required();
  sub->add_option("--pivot-lang", a.pivot_lang, "Pivot title language (default: model source)");
  sub->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
  sub->add_option("--batch-size", a.batch_size, "Encoding batch size")
      ->check(CLI::PositiveNumber);
}

int run_build_index(const IndexArgs& a) {
  const auto params = pbel::load_checkpoint(a.checkpoint);
  const auto kb = pbel::load_kb(a.kb);
  const auto table = maybe_table(a.features);
  const auto idx = pbel::build_index(params, kb, table.get(), a.pivot_lang,
                                     {a.batch_size, a.threads});
  pbel::save_index(idx, a.index);
  std::cout << a.index << "\tentries=" << idx.size() << "\tpivot_rows=" << idx.pivot_rows()
            << "\tpivot_lang=" << idx.pivot_lang << '\n';
  return 0;
}

int run_link(const IndexArgs& a, const std::string& mention, std::size_t k,
             const std::string& mode) {
  auto params = pbel::load_checkpoint(a.checkpoint);
  const auto kb = pbel::load_kb(a.kb);
  const auto table = maybe_table(a.features);
  std::optional<pbel::KbIndex> idx;
  if (!a.index.empty() && std::filesystem::exists(a.index)) {
    idx = pbel::load_index(a.index, {params.kind, pbel::params_fingerprint(params),
                                     kb.fingerprint()});
  } else {
    idx = pbel::build_index(params, kb, table.get(), a.pivot_lang, {a.batch_size, a.threads});
    if (!a.index.empty()) pbel::save_index(*idx, a.index);
  }
  const pbel::PivotModel model(std::move(params), std::move(*idx), table);
  const auto link_mode = mode == "direct" ? pbel::LinkMode::kDirect : pbel::LinkMode::kPivot;
  const auto top = model.topk(mention, k, link_mode, a.threads);
  for (std::size_t i = 0; i < top.size(); ++i) {
    std::cout << i + 1 << '\t' << top[i].id << '\t' << pbel::format_double(top[i].score) << '\t'
              << kb.find(top[i].id)->title << '\n';
  }
  return 0;
}

int run_evaluate(const Globals& g, const std::string& output, const std::string& format) {
  auto manifest = pbel::load_run_manifest(require_config(g.config, "evaluate"));
  if (g.seed) manifest.seed = *g.seed;
  if (!output.empty()) manifest.output = output;
  if (!format.empty()) manifest.format = pbel::parse_report_format(format);
  const auto report = pbel::evaluate(manifest);
  if (manifest.output.empty()) {
    std::cout << pbel::render_report(report, manifest.format);
  } else {
    std::cout << manifest.output << "\taccuracy=" << pbel::format_double(report.overall.accuracy)
              << "\tmentions=" << report.overall.count << '\n';
  }
  return 0;
}

int run_build_lexicon(const std::string& corpus_path, const std::string& output,
                      std::size_t iterations) {
  const auto corpus = pbel::load_corpus(corpus_path);
  pbel::Model1Options opt;
  opt.iterations = iterations;
  const auto result = pbel::train_model1(corpus, opt);
  for (std::size_t i = 0; i < result.log_likelihood.size(); ++i) {
    std::cerr << "iteration " << i << " log_likelihood "
              << pbel::format_double(result.log_likelihood[i]) << '\n';
  }
  pbel::save_lexicon(result.lexicon, output);
  std::cout << output << "\tsource_words=" << result.lexicon.size() << '\n';
  return 0;
}

struct IngestArgs {
  std::string kb, test, corpus, features, phylo, lexicon;
};

int run_ingest_check(const Globals& g, const IngestArgs& a) {
  if (!g.config.empty()) {
    const pbel::LoadedRun run(pbel::load_run_manifest(require_config(g.config, "ingest-check")));
    std::cout << "manifest\tok\tkb_entries=" << run.kb().size()
              << "\ttest_records=" << run.test().size() << "\tmodels=" << run.models().size()
              << '\n';
    return 0;
  }
  if (a.kb.empty() && a.test.empty() && a.corpus.empty() && a.features.empty() &&
      a.phylo.empty() && a.lexicon.empty()) {
    throw UsageError("ingest-check needs --config or at least one input file");
  }
  std::optional<pbel::KnowledgeBase> kb;
  if (!a.kb.empty()) {
    kb = pbel::load_kb(a.kb);
    std::cout << a.kb << "\tok\tentries=" << kb->size() << '\n';
  }
  if (!a.test.empty()) {
    const auto ts = pbel::load_test_set(a.test, kb ? &*kb : nullptr);
    std::cout << a.test << "\tok\trecords=" << ts.size() << '\n';
  }
  if (!a.corpus.empty()) {
    std::cout << a.corpus << "\tok\tpairs=" << pbel::load_corpus(a.corpus).size() << '\n';
  }
  if (!a.features.empty()) {
    std::cout << a.features << "\tok\tsegments=" << pbel::FeatureTable::load(a.features).size()
              << '\n';
  }
  if (!a.phylo.empty()) {
    pbel::PhyloWeights::load(a.phylo);
    std::cout << a.phylo << "\tok\n";
  }
  if (!a.lexicon.empty()) {
    std::cout << a.lexicon << "\tok\tsource_words=" << pbel::load_lexicon(a.lexicon).size()
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pivot-based cross-lingual entity linking", "pbel"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed overriding the manifest's");
  app.add_option("--config", g.config, "Manifest (JSON)");

  auto* train = app.add_subcommand("train", "Train an encoder pair (or a sweep) from a manifest");

  IndexArgs build_args;
  auto* build = app.add_subcommand("build-index", "Encode a KB into an index cache");
  add_index_args(build, build_args, true);

  IndexArgs link_args;
  std::string mention, mode = "pivot";
  std::size_t k = 1;
  auto* link = app.add_subcommand("link", "Rank KB entries for one mention");
  add_index_args(link, link_args, false);
  link->add_option("--mention", mention, "Mention text (IPA for phoneme models)")->required();
  link->add_option("--k", k, "Number of candidates")->check(CLI::PositiveNumber);
  link->add_option("--mode", mode, "direct or pivot")->check(CLI::IsMember({"direct", "pivot"}));

  std::string eval_output, eval_format;
  auto* evaluate = app.add_subcommand("evaluate", "Run an evaluation manifest");
  evaluate->add_option("--output", eval_output, "Report path (overrides the manifest)");
  evaluate->add_option("--format", eval_format, "json or tsv")
      ->check(CLI::IsMember({"json", "tsv"}));

  std::string lex_corpus, lex_output;
  std::size_t iterations = 5;
  auto* lexicon = app.add_subcommand("build-lexicon", "Induce a word lexicon with IBM Model 1");
  lexicon->add_option("--corpus", lex_corpus, "Parallel title TSV")->required();
  lexicon->add_option("--output", lex_output, "Lexicon TSV")->required();
  lexicon->add_option("--iterations", iterations, "EM iterations");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest-check", "Parse and validate input files");
  ingest->add_option("--kb", ingest_args.kb);
  ingest->add_option("--test", ingest_args.test);
  ingest->add_option("--corpus", ingest_args.corpus);
  ingest->add_option("--features", ingest_args.features);
  ingest->add_option("--phylo", ingest_args.phylo);
  ingest->add_option("--lexicon", ingest_args.lexicon);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << '\n' << app.help();
    return 2;
  }

  try {
    if (*train) return run_train(g);
    if (*build) return run_build_index(build_args);
    if (*link) return run_link(link_args, mention, k, mode);
    if (*evaluate) return run_evaluate(g, eval_output, eval_format);
    if (*lexicon) return run_build_lexicon(lex_corpus, lex_output, iterations);
    if (*ingest) return run_ingest_check(g, ingest_args);
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const pbel::Error& e) {
    std::cerr << "error: " << e.category() << ": " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 2;
}
