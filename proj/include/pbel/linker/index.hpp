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
#include <cstdint>
#include <exception>
#include <optional>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pbel/encoder/checkpoint.hpp"
#include "pbel/encoder/model.hpp"
#include "pbel/linker/kb.hpp"

namespace pbel {

// Dot product of two float rows with eight float64 accumulators, summed in a
// fixed order. Every scoring path goes through this one kernel, so a score
// never depends on how the KB was partitioned.
inline double dot(const float* a, const float* b, std::size_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) {
      acc[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
    }
  }
  for (std::size_t l = 0; i < n; ++i, ++l) {
    acc[l] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

// Unit-L2 copy of `v` (norm taken in float64).
inline std::vector<float> unit(std::span<const float> v) {
  double ss = 0.0;
  for (float x : v) ss += static_cast<double>(x) * x;
  if (!(ss > 0.0) || !std::isfinite(ss)) {
    throw DegenerateVectorError("cannot normalize a zero-norm or non-finite vector");
  }
  const double inv = 1.0 / std::sqrt(ss);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(v[i]) * inv);
  }
  return out;
}

inline constexpr std::int32_t kNoPivot = -1;

// Precomputed, unit-normalized English and pivot-title embeddings of one KB
// under one encoder pair. English rows follow KB row order; pivot rows cover
// only the entries with a title in `pivot_lang`.
struct KbIndex {
  std::string pivot_lang;
  ReprKind kind = ReprKind::kGrapheme;
  std::size_t dim = 0;
  std::uint64_t params_fingerprint = 0;
  std::uint64_t kb_fingerprint = 0;
  std::vector<std::uint64_t> ids;          // entity id per English row
  nn::Buffer<float> english;               // ids.size() × dim
  nn::Buffer<float> pivot;                 // pivot_entry.size() × dim
  std::vector<std::uint32_t> pivot_entry;  // pivot row → English row
  std::vector<std::int32_t> entry_pivot;   // English row → pivot row or kNoPivot

  std::size_t size() const { return ids.size(); }
  std::size_t pivot_rows() const { return pivot_entry.size(); }
  const float* english_row(std::size_t r) const { return english.data() + r * dim; }
  const float* pivot_row(std::size_t p) const { return pivot.data() + p * dim; }

  // Checks the structural invariants; throws FormatError on violation.
  void validate() const {
    if (dim == 0) throw FormatError("index: zero dimension");
    if (english.size() != ids.size() * dim || pivot.size() != pivot_entry.size() * dim) {
      throw FormatError("index: matrix sizes do not match row counts");
    }
    if (entry_pivot.size() != ids.size()) throw FormatError("index: pivot map size mismatch");
    for (std::size_t r = 1; r < ids.size(); ++r) {
      if (ids[r - 1] >= ids[r]) throw FormatError("index: entity ids not strictly increasing");
    }
    std::size_t linked = 0;
    for (std::size_t r = 0; r < entry_pivot.size(); ++r) {
      const auto p = entry_pivot[r];
      if (p == kNoPivot) continue;
      if (p < 0 || static_cast<std::size_t>(p) >= pivot_entry.size() ||
          pivot_entry[static_cast<std::size_t>(p)] != r) {
        throw FormatError("index: pivot map is not a consistent injection");
      }
      ++linked;
    }
    if (linked != pivot_entry.size()) throw FormatError("index: orphan pivot rows");
    auto check_unit = [&](const nn::Buffer<float>& m) {
      for (std::size_t off = 0; off < m.size(); off += dim) {
        const double n2 = dot(m.data() + off, m.data() + off, dim);
        if (!(std::abs(std::sqrt(n2) - 1.0) <= 1e-5)) {
          throw FormatError("index: row without unit norm");
        }
      }
    };
    check_unit(english);
    check_unit(pivot);
  }

  // Index over caller-provided vectors (normalized here). `pivot_vectors`
  // holds one optional vector per entry. Used by tests and benchmarks.
  static KbIndex from_embeddings(const std::vector<std::uint64_t>& entity_ids,
                                 const std::vector<std::vector<float>>& english_vectors,
                                 const std::vector<std::optional<std::vector<float>>>& pivot_vectors,
                                 std::string pivot_lang = "piv") {
    if (entity_ids.empty()) throw EmptyInputError("index: no entries");
    if (english_vectors.size() != entity_ids.size() ||
        pivot_vectors.size() != entity_ids.size()) {
      throw InvalidArgument("index: per-entry inputs differ in length");
    }
    KbIndex idx;
    idx.pivot_lang = std::move(pivot_lang);
    idx.dim = english_vectors.front().size();
    idx.ids = entity_ids;
    idx.entry_pivot.assign(entity_ids.size(), kNoPivot);
    for (std::size_t r = 0; r < entity_ids.size(); ++r) {
      if (english_vectors[r].size() != idx.dim) throw DimensionError("index: ragged rows");
      const auto u = unit(english_vectors[r]);
      idx.english.insert(idx.english.end(), u.begin(), u.end());
      if (pivot_vectors[r]) {
        if (pivot_vectors[r]->size() != idx.dim) throw DimensionError("index: ragged rows");
        const auto pu = unit(*pivot_vectors[r]);
        idx.entry_pivot[r] = static_cast<std::int32_t>(idx.pivot_entry.size());
        idx.pivot_entry.push_back(static_cast<std::uint32_t>(r));
        idx.pivot.insert(idx.pivot.end(), pu.begin(), pu.end());
      }
    }
    idx.validate();
    return idx;
  }
};

inline std::size_t resolve_threads(std::size_t threads) {
  if (threads != 0) return threads;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs fn(chunk) for chunk in [0, chunks) over up to `threads` workers with
// a static round-robin assignment.
template <typename Fn>
void parallel_chunks(std::size_t chunks, std::size_t threads, Fn&& fn) {
  threads = std::min(resolve_threads(threads), std::max<std::size_t>(chunks, 1));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = t; c < chunks; c += threads) fn(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct IndexOptions {
  std::size_t batch_size = 64;
  std::size_t threads = 1;
};

namespace detail {

// Encodes `texts` with one side of `params` in fixed-size batches and writes
// unit rows into `out` (texts.size() × dim). Batch boundaries do not depend
// on the thread count.
inline void encode_rows(const EncoderParams<float>& params, Side side,
                        const std::vector<const std::string*>& texts, const FeatureTable* table,
                        const IndexOptions& opt, nn::Buffer<float>& out) {
  const std::size_t dim = params.output_dim();
  out.assign(texts.size() * dim, 0.0f);
  const std::size_t bs = std::max<std::size_t>(1, opt.batch_size);
  const std::size_t batches = (texts.size() + bs - 1) / bs;
  parallel_chunks(batches, opt.threads, [&](std::size_t b) {
    const std::size_t lo = b * bs;
    const std::size_t hi = std::min(texts.size(), lo + bs);
    std::vector<SeqRepr> seqs;
    for (std::size_t i = lo; i < hi; ++i) {
      seqs.push_back(represent(*texts[i], params.kind, params.vocab(side), table));
    }
    const auto enc = encode_many(params, side, std::span<const SeqRepr>(seqs));
    for (std::size_t i = lo; i < hi; ++i) {
      const auto u = unit(enc.row(i - lo));
      std::copy(u.begin(), u.end(), out.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
  });
}

}  // namespace detail

// Encodes every English title with the English side of `params` and every
// title in `pivot_lang` (default: the model's source language) with the
// source side. Phoneme and articulatory models read KB titles as IPA and need
// the feature table the model was trained with.
inline KbIndex build_index(const EncoderParams<float>& params, const KnowledgeBase& kb,
                           const FeatureTable* table = nullptr, std::string pivot_lang = "",
                           const IndexOptions& opt = {}) {
  if (kb.empty()) throw EmptyInputError("build_index: empty knowledge base");
  if (params.kind != ReprKind::kGrapheme) {
    if (!table) {
      throw KindMismatchError(std::string("build_index: ") + to_string(params.kind) +
                              " model needs the feature table it was trained with");
    }
    if (table->fingerprint() != params.feature_table_hash) {
      throw KindMismatchError("build_index: feature table differs from the model's");
    }
  }
  KbIndex idx;
  idx.pivot_lang = pivot_lang.empty() ? params.src_lang : std::move(pivot_lang);
  idx.kind = params.kind;
  idx.dim = params.output_dim();
  idx.params_fingerprint = params_fingerprint(params);
  idx.kb_fingerprint = kb.fingerprint();
  idx.entry_pivot.assign(kb.size(), kNoPivot);

  std::vector<const std::string*> english, pivots;
  for (std::size_t r = 0; r < kb.size(); ++r) {
    idx.ids.push_back(kb[r].id);
    english.push_back(&kb[r].title);
    if (const auto* t = kb[r].pivot(idx.pivot_lang)) {
      idx.entry_pivot[r] = static_cast<std::int32_t>(idx.pivot_entry.size());
      idx.pivot_entry.push_back(static_cast<std::uint32_t>(r));
      pivots.push_back(t);
    }
  }
  detail::encode_rows(params, Side::kEnglish, english, table, opt, idx.english);
  detail::encode_rows(params, Side::kSource, pivots, table, opt, idx.pivot);
  idx.validate();
  return idx;
}

}  // namespace pbel
