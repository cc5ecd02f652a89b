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
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbel/linker/linker.hpp"

namespace pbel {

struct SplitStat {
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;  // 0 for an empty split
  friend bool operator==(const SplitStat&, const SplitStat&) = default;
};

struct RecallPoint {
  std::size_t k = 0;
  std::size_t hits = 0;
  double recall = 0.0;
  friend bool operator==(const RecallPoint&, const RecallPoint&) = default;
};

struct MentionResult {
  std::string mention;
  std::uint64_t gold = 0;
  std::optional<std::uint64_t> predicted;
  std::vector<Candidate> ranked;
  friend bool operator==(const MentionResult&, const MentionResult&) = default;
};

struct EvalReport {
  std::string system;
  std::string mode;
  std::string repr;
  std::uint64_t seed = 0;
  std::size_t kb_entries = 0;
  SplitStat overall;
  std::vector<RecallPoint> recall;  // empty for systems that do not rank
  std::array<SplitStat, 3> by_type;  // indexed by EntityType
  SplitStat covered;                 // gold entry has a title in a run pivot language
  SplitStat uncovered;
  std::vector<MentionResult> candidates;  // only when requested
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Per-mention outcome. `gold_rank` is the 1-based position of the gold entry
// in the ranked list, if it appears there.
struct Outcome {
  EntityType type = EntityType::kPer;
  bool covered = false;
  bool correct = false;
  std::optional<std::size_t> gold_rank;
};

namespace detail {

inline void finish(SplitStat& s) {
  s.accuracy = s.count ? static_cast<double>(s.correct) / static_cast<double>(s.count) : 0.0;
}

}  // namespace detail

// Throws InvariantError when a report breaks a metric law. Recall@1 must
// equal accuracy and recall may not fall as k grows. Every gold id is in the
// KB, so recall is 1 once k reaches the KB size. The type and coverage splits
// partition the test set and average back to the overall accuracy.
inline void check_metric_laws(const EvalReport& r) {
  auto fail = [](const std::string& what) { throw InvariantError("metric law violated: " + what); };
  const double n = static_cast<double>(r.overall.count);
  if (r.covered.count + r.uncovered.count != r.overall.count) fail("coverage split sizes");
  std::size_t typed = 0;
  for (const auto& s : r.by_type) typed += s.count;
  if (typed != r.overall.count) fail("type split sizes");
  if (r.overall.count) {
    const double cov = (r.covered.accuracy * static_cast<double>(r.covered.count) +
                        r.uncovered.accuracy * static_cast<double>(r.uncovered.count)) / n;
    if (std::abs(cov - r.overall.accuracy) > 1e-9) fail("coverage splits do not aggregate");
    double by_type = 0.0;
    for (const auto& s : r.by_type) by_type += s.accuracy * static_cast<double>(s.count);
    if (std::abs(by_type / n - r.overall.accuracy) > 1e-9) fail("type splits do not aggregate");
  }
  for (std::size_t i = 0; i < r.recall.size(); ++i) {
    const auto& p = r.recall[i];
    if (p.k == 1 && p.recall != r.overall.accuracy) fail("recall@1 differs from accuracy");
    if (i && p.recall < r.recall[i - 1].recall) fail("recall decreases in k");
    if (r.overall.count && p.k >= r.kb_entries && p.recall != 1.0) {
      fail("recall@" + std::to_string(p.k) + " below 1 with every gold in the KB");
    }
  }
}

// Aggregates outcomes into a report (identity fields left empty) and checks
// the metric laws. `ks` must be strictly increasing; pass an empty list for
// systems that produce a single answer.
inline EvalReport aggregate(std::span<const Outcome> outcomes, std::span<const std::size_t> ks,
                            std::size_t kb_entries) {
  EvalReport r;
  r.kb_entries = kb_entries;
  for (const auto& o : outcomes) {
    for (auto* s : {&r.overall, &r.by_type[static_cast<std::size_t>(o.type)],
                    o.covered ? &r.covered : &r.uncovered}) {
      ++s->count;
      s->correct += o.correct;
    }
  }
  detail::finish(r.overall);
  detail::finish(r.covered);
  detail::finish(r.uncovered);
  for (auto& s : r.by_type) detail::finish(s);
  for (const std::size_t k : ks) {
    RecallPoint p{k, 0, 0.0};
    for (const auto& o : outcomes) p.hits += o.gold_rank && *o.gold_rank <= k;
    p.recall = outcomes.empty() ? 0.0
                                : static_cast<double>(p.hits) / static_cast<double>(outcomes.size());
    r.recall.push_back(p);
  }
  check_metric_laws(r);
  return r;
}

// ---- JSON ----

inline nlohmann::ordered_json split_json(const SplitStat& s) {
  return {{"count", s.count}, {"correct", s.correct}, {"accuracy", s.accuracy}};
}

inline SplitStat split_from_json(const nlohmann::json& j) {
  return {j.at("count").get<std::size_t>(), j.at("correct").get<std::size_t>(),
          j.at("accuracy").get<double>()};
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["system"] = r.system;
  j["mode"] = r.mode;
  j["repr"] = r.repr;
  j["seed"] = r.seed;
  j["kb_entries"] = r.kb_entries;
  j["mentions"] = r.overall.count;
  j["correct"] = r.overall.correct;
  j["accuracy"] = r.overall.accuracy;
  auto recall = nlohmann::ordered_json::array();
  for (const auto& p : r.recall) recall.push_back({{"k", p.k}, {"hits", p.hits}, {"recall", p.recall}});
  j["recall"] = std::move(recall);
  nlohmann::ordered_json types;
  for (auto t : {EntityType::kPer, EntityType::kOrg, EntityType::kLoc}) {
    types[to_string(t)] = split_json(r.by_type[static_cast<std::size_t>(t)]);
  }
  j["by_type"] = std::move(types);
  j["coverage"] = {{"covered", split_json(r.covered)}, {"uncovered", split_json(r.uncovered)}};
  if (!r.candidates.empty()) {
    auto cands = nlohmann::ordered_json::array();
    for (const auto& m : r.candidates) {
      nlohmann::ordered_json row;
      row["mention"] = m.mention;
      row["gold"] = m.gold;
      row["predicted"] = m.predicted ? nlohmann::ordered_json(*m.predicted) : nullptr;
      auto ranked = nlohmann::ordered_json::array();
      for (const auto& c : m.ranked) ranked.push_back({{"id", c.id}, {"score", c.score}});
      row["ranked"] = std::move(ranked);
      cands.push_back(std::move(row));
    }
    j["candidates"] = std::move(cands);
  }
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.system = j.at("system").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.repr = j.at("repr").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.kb_entries = j.at("kb_entries").get<std::size_t>();
    r.overall = {j.at("mentions").get<std::size_t>(), j.at("correct").get<std::size_t>(),
                 j.at("accuracy").get<double>()};
    for (const auto& p : j.at("recall")) {
      r.recall.push_back({p.at("k").get<std::size_t>(), p.at("hits").get<std::size_t>(),
                          p.at("recall").get<double>()});
    }
    for (auto t : {EntityType::kPer, EntityType::kOrg, EntityType::kLoc}) {
      r.by_type[static_cast<std::size_t>(t)] = split_from_json(j.at("by_type").at(to_string(t)));
    }
    r.covered = split_from_json(j.at("coverage").at("covered"));
    r.uncovered = split_from_json(j.at("coverage").at("uncovered"));
    if (j.contains("candidates")) {
      for (const auto& row : j.at("candidates")) {
        MentionResult m;
        m.mention = row.at("mention").get<std::string>();
        m.gold = row.at("gold").get<std::uint64_t>();
        if (!row.at("predicted").is_null()) m.predicted = row.at("predicted").get<std::uint64_t>();
        for (const auto& c : row.at("ranked")) {
          m.ranked.push_back({c.at("id").get<std::uint64_t>(), c.at("score").get<double>()});
        }
        r.candidates.push_back(std::move(m));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  return r;
}

// ---- TSV ----

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Sectioned TSV: a summary block, then one block each for the recall curve,
// entity types and coverage splits. Each block starts with a "# name" line
// and a header row.
inline std::string report_to_tsv(const EvalReport& r) {
  std::string out;
  auto row = [&](std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out += '\t';
      out += c;
      first = false;
    }
    out += '\n';
  };
  auto split_row = [&](const std::string& name, const SplitStat& s) {
    row({name, std::to_string(s.count), std::to_string(s.correct), format_double(s.accuracy)});
  };
  out += "# summary\n";
  row({"field", "value"});
  row({"system", r.system});
  row({"mode", r.mode});
  row({"repr", r.repr});
  row({"seed", std::to_string(r.seed)});
  row({"kb_entries", std::to_string(r.kb_entries)});
  row({"mentions", std::to_string(r.overall.count)});
  row({"correct", std::to_string(r.overall.correct)});
  row({"accuracy", format_double(r.overall.accuracy)});
  out += "# recall\n";
  row({"k", "hits", "recall"});
  for (const auto& p : r.recall) {
    row({std::to_string(p.k), std::to_string(p.hits), format_double(p.recall)});
  }
  out += "# by_type\n";
  row({"type", "count", "correct", "accuracy"});
  for (auto t : {EntityType::kPer, EntityType::kOrg, EntityType::kLoc}) {
    split_row(to_string(t), r.by_type[static_cast<std::size_t>(t)]);
  }
  out += "# coverage\n";
  row({"split", "count", "correct", "accuracy"});
  split_row("covered", r.covered);
  split_row("uncovered", r.uncovered);
  return out;
}

enum class ReportFormat { kJson, kTsv };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "tsv") return ReportFormat::kTsv;
  throw InvalidArgument("report format must be json or tsv, got '" + std::string(s) + "'");
}

inline std::string render_report(const EvalReport& r, ReportFormat f) {
  return f == ReportFormat::kJson ? report_to_json(r).dump(2) + "\n" : report_to_tsv(r);
}

inline void emit_report(const EvalReport& r, const std::string& path, ReportFormat f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report " + path);
  out << render_report(r, f);
  if (!out) throw IoError("failed writing report " + path);
}

inline EvalReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report " + path);
  try {
    return report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace pbel
