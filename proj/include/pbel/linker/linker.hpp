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
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbel/linker/index.hpp"

namespace pbel {

enum class LinkMode : std::uint8_t { kDirect, kPivot };

inline const char* to_string(LinkMode m) { return m == LinkMode::kDirect ? "direct" : "pivot"; }

inline constexpr double kNoScore = -std::numeric_limits<double>::infinity();

// max(direct, pivot); an absent pivot title contributes −∞, so the result is
// exactly `direct`.
inline double combine_scores(double direct, std::optional<double> pivot) {
  return pivot ? std::max(direct, *pivot) : direct;
}

struct Candidate {
  std::uint64_t id = 0;
  double score = 0.0;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Ranking order: higher score first, lower entity id on ties.
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

// Direct cosine of a unit query against English row `r`.
inline double direct_score(const KbIndex& idx, std::span<const float> query, std::size_t r) {
  return dot(query.data(), idx.english_row(r), idx.dim);
}

inline std::optional<double> pivot_score(const KbIndex& idx, std::span<const float> query,
                                         std::size_t r) {
  const auto p = idx.entry_pivot[r];
  if (p == kNoPivot) return std::nullopt;
  return dot(query.data(), idx.pivot_row(static_cast<std::size_t>(p)), idx.dim);
}

inline double entry_score(const KbIndex& idx, std::span<const float> query, std::size_t r,
                          LinkMode mode) {
  const double d = direct_score(idx, query, r);
  return mode == LinkMode::kDirect ? d : combine_scores(d, pivot_score(idx, query, r));
}

// The KB scan works on fixed-size chunks of rows.
inline constexpr std::size_t kScanChunk = 4096;

inline void check_query(const KbIndex& idx, std::span<const float> query) {
  if (query.size() != idx.dim) {
    throw DimensionError("query has " + std::to_string(query.size()) +
                         " dims, index has " + std::to_string(idx.dim));
  }
}

// Score of every KB row (row order).
inline std::vector<double> score_all(const KbIndex& idx, std::span<const float> query,
                                     LinkMode mode, std::size_t threads = 1) {
  check_query(idx, query);
  std::vector<double> scores(idx.size());
  const std::size_t chunks = (idx.size() + kScanChunk - 1) / kScanChunk;
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    const std::size_t hi = std::min(idx.size(), (c + 1) * kScanChunk);
    for (std::size_t r = c * kScanChunk; r < hi; ++r) scores[r] = entry_score(idx, query, r, mode);
  });
  return scores;
}

// k best of `cands` in ranking order.
inline std::vector<Candidate> select_top(std::vector<Candidate> cands, std::size_t k) {
  k = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(),
                    ranks_before);
  cands.resize(k);
  return cands;
}

inline void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) {
    throw InvalidArgument("k must be in [1, " + std::to_string(n) + "], got " +
                          std::to_string(k));
  }
}

// Top-k over precomputed per-row scores: each chunk keeps its own k best and
// the chunk winners are merged.
inline std::vector<Candidate> topk_from_scores(std::span<const std::uint64_t> ids,
                                               std::span<const double> scores, std::size_t k,
                                               std::size_t threads = 1) {
  if (ids.size() != scores.size()) throw DimensionError("topk: ids and scores differ");
  check_k(k, ids.size());
  const std::size_t chunks = (ids.size() + kScanChunk - 1) / kScanChunk;
  std::vector<std::vector<Candidate>> best(chunks);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * kScanChunk;
    const std::size_t hi = std::min(ids.size(), lo + kScanChunk);
    std::vector<Candidate> local;
    local.reserve(hi - lo);
    for (std::size_t r = lo; r < hi; ++r) local.push_back({ids[r], scores[r]});
    best[c] = select_top(std::move(local), k);
  });
  std::vector<Candidate> merged;
  for (auto& b : best) merged.insert(merged.end(), b.begin(), b.end());
  return select_top(std::move(merged), k);
}

inline std::vector<Candidate> topk(const KbIndex& idx, std::span<const float> query, std::size_t k,
                                   LinkMode mode, std::size_t threads = 1) {
  check_k(k, idx.size());
  const auto scores = score_all(idx, query, mode, threads);
  return topk_from_scores(idx.ids, scores, k, threads);
}

inline std::uint64_t link(const KbIndex& idx, std::span<const float> query, LinkMode mode,
                          std::size_t threads = 1) {
  if (idx.size() == 0) throw EmptyInputError("link: empty knowledge base");
  return topk(idx, query, 1, mode, threads).front().id;
}

// A trained encoder pair together with its KB index. Construction verifies
// the index was built by these exact parameters.
class PivotModel {
 public:
  PivotModel(EncoderParams<float> params, KbIndex index,
             std::shared_ptr<const FeatureTable> table = nullptr)
      : params_(std::move(params)), index_(std::move(index)), table_(std::move(table)) {
    if (index_.params_fingerprint != params_fingerprint(params_)) {
      throw IndexMismatchError("index for pivot '" + index_.pivot_lang +
                               "' was built with different encoder parameters");
    }
    if (index_.kind != params_.kind) {
      throw KindMismatchError("index and model representation kinds differ");
    }
    if (params_.kind != ReprKind::kGrapheme &&
        (!table_ || table_->fingerprint() != params_.feature_table_hash)) {
      throw KindMismatchError("model needs the feature table it was trained with");
    }
  }

  const EncoderParams<float>& params() const { return params_; }
  const KbIndex& index() const { return index_; }
  const std::string& pivot_lang() const { return index_.pivot_lang; }
  const FeatureTable* table() const { return table_.get(); }

  // Rejects use against a KB other than the one indexed.
  void check_kb(const KnowledgeBase& kb) const {
    if (kb.fingerprint() != index_.kb_fingerprint) {
      throw IndexMismatchError("index for pivot '" + index_.pivot_lang +
                               "' was built from a different knowledge base");
    }
  }

  SeqRepr represent_mention(const std::string& mention) const {
    return represent(text::nfc(mention), params_.kind, params_.src_vocab, table_.get());
  }

  // Unit-normalized source-side encoding of a mention.
  std::vector<float> query(const std::string& mention) const {
    return unit(encode_src(params_, represent_mention(mention)));
  }

  std::vector<double> scores(const std::string& mention, LinkMode mode,
                             std::size_t threads = 1) const {
    return score_all(index_, query(mention), mode, threads);
  }
  std::vector<Candidate> topk(const std::string& mention, std::size_t k, LinkMode mode,
                              std::size_t threads = 1) const {
    return pbel::topk(index_, query(mention), k, mode, threads);
  }
  std::uint64_t link(const std::string& mention, LinkMode mode, std::size_t threads = 1) const {
    return pbel::link(index_, query(mention), mode, threads);
  }

 private:
  EncoderParams<float> params_;
  KbIndex index_;
  std::shared_ptr<const FeatureTable> table_;
};

// Symmetric language-pair distances in [0, 1].
class PhyloWeights {
 public:
  void set(const std::string& a, const std::string& b, double d) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw InvalidArgument("phylogenetic distance must be in [0, 1]");
    }
    dist_[key(a, b)] = d;
  }

  // Distance of a language to itself is 0; unknown pairs have none.
  std::optional<double> distance(const std::string& a, const std::string& b) const {
    if (a == b) return 0.0;
    const auto it = dist_.find(key(a, b));
    if (it == dist_.end()) return std::nullopt;
    return it->second;
  }

  // w = 1 − d; a pair with no recorded distance gets weight 0.
  double weight(const std::string& source, const std::string& pivot) const {
    const auto d = distance(source, pivot);
    return d ? 1.0 - *d : 0.0;
  }

  std::size_t size() const { return dist_.size(); }

  // `lang_a<TAB>lang_b<TAB>distance` per line.
  static PhyloWeights load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open phylogenetic distance file " + path);
    PhyloWeights w;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::string_view line = text::chomp(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto cols = text::split(line, '\t');
      if (cols.size() != 3) throw ParseError(path, lineno, "expected lang_a<TAB>lang_b<TAB>distance");
      if (cols[0].empty() || cols[1].empty()) throw ParseError(path, lineno, "empty language tag");
      double d = 0.0;
      try {
        std::size_t used = 0;
        d = std::stod(std::string(cols[2]), &used);
        if (used != cols[2].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ParseError(path, lineno, "distance is not a number");
      }
      if (!(d >= 0.0 && d <= 1.0)) throw ParseError(path, lineno, "distance must be in [0, 1]");
      const auto k = key(std::string(cols[0]), std::string(cols[1]));
      if (w.dist_.count(k) && w.dist_.at(k) != d) {
        throw ParseError(path, lineno, "conflicting distance for a language pair");
      }
      w.dist_[k] = d;
    }
    return w;
  }

 private:
  static std::pair<std::string, std::string> key(const std::string& a, const std::string& b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }
  std::map<std::pair<std::string, std::string>, double> dist_;
};

// Per-entry multi-pivot score: max over models h of w_h · score_h(m, e).
// Every model must index the same KB (same row order).
inline std::vector<double> multi_pivot_scores(std::span<const PivotModel* const> models,
                                              std::span<const double> weights,
                                              const std::string& mention, LinkMode mode,
                                              std::size_t threads = 1) {
  if (models.empty()) throw InvalidArgument("multi-pivot linking needs at least one model");
  if (weights.size() != models.size()) {
    throw InvalidArgument("multi-pivot: one weight per model required");
  }
  const auto& first = models.front()->index();
  std::vector<double> best(first.size(), kNoScore);
  for (std::size_t h = 0; h < models.size(); ++h) {
    const auto& idx = models[h]->index();
    if (idx.kb_fingerprint != first.kb_fingerprint || idx.ids != first.ids) {
      throw IndexMismatchError("multi-pivot: indices cover different knowledge bases");
    }
    const auto s = models[h]->scores(mention, mode, threads);
    for (std::size_t r = 0; r < s.size(); ++r) best[r] = std::max(best[r], weights[h] * s[r]);
  }
  return best;
}

inline std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0); }

inline std::vector<double> phylo_weights(std::span<const PivotModel* const> models,
                                         const PhyloWeights& phylo, const std::string& source) {
  std::vector<double> w;
  for (const auto* m : models) w.push_back(phylo.weight(source, m->pivot_lang()));
  return w;
}

inline std::vector<Candidate> multi_pivot_topk(std::span<const PivotModel* const> models,
                                               std::span<const double> weights,
                                               const std::string& mention, std::size_t k,
                                               LinkMode mode, std::size_t threads = 1) {
  const auto scores = multi_pivot_scores(models, weights, mention, mode, threads);
  return topk_from_scores(models.front()->index().ids, scores, k, threads);
}

inline std::uint64_t multi_pivot_link(std::span<const PivotModel* const> models,
                                      std::span<const double> weights,
                                      const std::string& mention, LinkMode mode = LinkMode::kPivot,
                                      std::size_t threads = 1) {
  return multi_pivot_topk(models, weights, mention, 1, mode, threads).front().id;
}

}  // namespace pbel
