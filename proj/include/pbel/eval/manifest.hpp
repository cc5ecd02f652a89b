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
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbel/encoder/train.hpp"
#include "pbel/eval/metrics.hpp"

namespace pbel {

enum class System { kPbel, kExact, kExactPivot, kTranslate };
enum class RunMode { kDirect, kPivot, kMulti };
enum class Weighting { kUniform, kPhylo };

inline const char* to_string(System s) {
  switch (s) {
    case System::kPbel: return "pbel";
    case System::kExact: return "exact";
    case System::kExactPivot: return "exact-pivot";
    case System::kTranslate: return "translate";
  }
  return "?";
}
inline const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::kDirect: return "direct";
    case RunMode::kPivot: return "pivot";
    case RunMode::kMulti: return "multi";
  }
  return "?";
}
inline const char* to_string(Weighting w) { return w == Weighting::kUniform ? "uniform" : "phylo"; }

namespace detail {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const E (&all)[N], const char* what) {
  for (E e : all) {
    if (s == to_string(e)) return e;
  }
  std::string options;
  for (E e : all) options += std::string(options.empty() ? "" : ", ") + to_string(e);
  throw InvalidArgument(std::string(what) + " must be one of " + options + ", got '" +
                        std::string(s) + "'");
}

// Rejects keys outside `allowed`, so a misspelled key fails loudly instead
// of silently falling back to a default.
inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw FormatError(where + ": unknown key '" + key + "'");
    }
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

}  // namespace detail

inline System parse_system(std::string_view s) {
  static constexpr System all[] = {System::kPbel, System::kExact, System::kExactPivot,
                                   System::kTranslate};
  return detail::parse_enum(s, all, "system");
}
inline RunMode parse_run_mode(std::string_view s) {
  static constexpr RunMode all[] = {RunMode::kDirect, RunMode::kPivot, RunMode::kMulti};
  return detail::parse_enum(s, all, "mode");
}
inline Weighting parse_weighting(std::string_view s) {
  static constexpr Weighting all[] = {Weighting::kUniform, Weighting::kPhylo};
  return detail::parse_enum(s, all, "weighting");
}

struct PivotSpec {
  std::string lang;        // pivot-title language in the KB; default: the model's
  std::string checkpoint;
  std::string index;       // optional index cache, built and written if absent
};

// One evaluation run. Relative paths resolve against the manifest's
// directory.
struct RunManifest {
  System system = System::kPbel;
  std::optional<ReprKind> repr;  // when set, every checkpoint must match
  RunMode mode = RunMode::kPivot;
  Weighting weighting = Weighting::kUniform;
  std::vector<PivotSpec> pivots;
  std::vector<std::string> pivot_langs;  // exact-pivot system and coverage split
  std::string kb;
  std::string test;
  std::string features;
  std::string phylo;
  std::string lexicon;
  std::vector<std::size_t> ks = {1, 2, 5, 10, 20, 50, 100};
  std::string output;
  ReportFormat format = ReportFormat::kJson;
  bool dump_candidates = false;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t batch_size = 64;

  // Checks internal consistency and that every referenced input exists.
  void validate() const {
    auto need = [](const std::string& path, const char* what) {
      if (path.empty()) throw InvalidArgument(std::string("manifest: missing ") + what);
      if (!std::filesystem::exists(path)) {
        throw IoError(std::string("manifest: ") + what + " not found: " + path);
      }
    };
    need(kb, "kb");
    need(test, "test");
    if (ks.empty()) throw InvalidArgument("manifest: k list is empty");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] == 0 || (i && ks[i] <= ks[i - 1])) {
        throw InvalidArgument("manifest: k values must be positive and strictly increasing");
      }
    }
    if (batch_size == 0) throw InvalidArgument("manifest: batch_size must be positive");
    switch (system) {
      case System::kPbel:
        if (pivots.empty()) throw InvalidArgument("manifest: pbel runs need at least one pivot");
        if (mode != RunMode::kMulti && pivots.size() != 1) {
          throw InvalidArgument("manifest: direct and pivot modes take exactly one pivot model");
        }
        for (const auto& p : pivots) need(p.checkpoint, "checkpoint");
        if (weighting == Weighting::kPhylo) need(phylo, "phylo");
        if (!features.empty()) need(features, "features");
        break;
      case System::kExactPivot:
        if (pivot_langs.empty()) throw InvalidArgument("manifest: exact-pivot needs pivot_langs");
        break;
      case System::kTranslate:
        need(lexicon, "lexicon");
        break;
      case System::kExact:
        break;
    }
  }
};

inline RunManifest parse_run_manifest(const nlohmann::json& j,
                                      const std::filesystem::path& base = {}) {
  detail::check_keys(j,
                     {"system", "repr", "mode", "weighting", "pivots", "pivot_langs", "kb", "test",
                      "features", "phylo", "lexicon", "k", "output", "format", "dump_candidates",
                      "seed", "threads", "batch_size"},
                     "manifest");
  RunManifest m;
  try {
    if (j.contains("system")) m.system = parse_system(j["system"].get<std::string>());
    if (j.contains("repr")) m.repr = parse_repr_kind(j["repr"].get<std::string>());
    if (j.contains("mode")) m.mode = parse_run_mode(j["mode"].get<std::string>());
    if (j.contains("weighting")) m.weighting = parse_weighting(j["weighting"].get<std::string>());
    for (const auto& p : j.value("pivots", nlohmann::json::array())) {
      detail::check_keys(p, {"lang", "checkpoint", "index"}, "manifest pivot");
      m.pivots.push_back({p.value("lang", ""), detail::resolve(base, p.value("checkpoint", "")),
                          detail::resolve(base, p.value("index", ""))});
    }
    m.pivot_langs = j.value("pivot_langs", std::vector<std::string>{});
    m.kb = detail::resolve(base, j.value("kb", ""));
    m.test = detail::resolve(base, j.value("test", ""));
    m.features = detail::resolve(base, j.value("features", ""));
    m.phylo = detail::resolve(base, j.value("phylo", ""));
    m.lexicon = detail::resolve(base, j.value("lexicon", ""));
    if (j.contains("k")) m.ks = j["k"].get<std::vector<std::size_t>>();
    m.output = detail::resolve(base, j.value("output", ""));
    if (j.contains("format")) m.format = parse_report_format(j["format"].get<std::string>());
    m.dump_candidates = j.value("dump_candidates", false);
    m.seed = j.value("seed", std::uint64_t{0});
    m.threads = j.value("threads", std::size_t{1});
    m.batch_size = j.value("batch_size", std::size_t{64});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  return m;
}

inline RunManifest load_run_manifest(const std::string& path) {
  return parse_run_manifest(detail::read_json_file(path),
                            std::filesystem::path(path).parent_path());
}

// One training run.
struct TrainJob {
  TrainingConfig config;
  std::string corpus;
  std::string src_lang;
  std::string features;
  std::string extra_corpus;
  std::optional<std::size_t> extra_size;  // first n pairs of extra_corpus; all when unset
  std::string output;
};

// Training manifest. With `extra_sizes`, it expands into one job per size,
// each adding the first n pairs of `extra_corpus` to the training pool and
// writing `<output stem>.extra<n><ext>`.
struct TrainManifest {
  TrainJob base;
  std::vector<std::size_t> extra_sizes;

  std::vector<TrainJob> expand() const {
    if (extra_sizes.empty()) return {base};
    std::vector<TrainJob> jobs;
    const std::filesystem::path out(base.output);
    for (std::size_t n : extra_sizes) {
      TrainJob job = base;
      job.extra_size = n;
      auto name = out.stem().string() + ".extra" + std::to_string(n) + out.extension().string();
      job.output = (out.parent_path() / name).string();
      jobs.push_back(std::move(job));
    }
    return jobs;
  }
};

inline TrainManifest parse_train_manifest(const nlohmann::json& j,
                                          const std::filesystem::path& base = {}) {
  detail::check_keys(j,
                     {"corpus", "src_lang", "repr", "features", "embed_dim", "hidden_dim",
                      "margin", "batch_size", "max_epochs", "learning_rate", "patience",
                      "dev_fraction", "clip_norm", "seed", "output", "extra_corpus",
                      "extra_sizes"},
                     "train manifest");
  TrainManifest m;
  auto& job = m.base;
  auto& c = job.config;
  try {
    job.corpus = detail::resolve(base, j.value("corpus", ""));
    job.src_lang = j.value("src_lang", "");
    if (j.contains("repr")) c.kind = parse_repr_kind(j["repr"].get<std::string>());
    job.features = detail::resolve(base, j.value("features", ""));
    c.dims.embed = j.value("embed_dim", c.dims.embed);
    c.dims.hidden = j.value("hidden_dim", c.dims.hidden);
    c.margin = j.value("margin", c.margin);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.patience = j.value("patience", c.patience);
    c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.seed = j.value("seed", c.seed);
    job.output = detail::resolve(base, j.value("output", ""));
    job.extra_corpus = detail::resolve(base, j.value("extra_corpus", ""));
    m.extra_sizes = j.value("extra_sizes", std::vector<std::size_t>{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train manifest: ") + e.what());
  }
  if (job.corpus.empty()) throw InvalidArgument("train manifest: missing corpus");
  if (job.output.empty()) throw InvalidArgument("train manifest: missing output");
  if (!m.extra_sizes.empty() && job.extra_corpus.empty()) {
    throw InvalidArgument("train manifest: extra_sizes given without extra_corpus");
  }
  c.validate();
  return m;
}

inline TrainManifest load_train_manifest(const std::string& path) {
  return parse_train_manifest(detail::read_json_file(path),
                              std::filesystem::path(path).parent_path());
}

}  // namespace pbel
