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
#include <span>
#include <vector>

#include "pbel/encoder/params.hpp"
#include "pbel/numerics/ops.hpp"

namespace pbel {

namespace detail {

inline void check_sequence(const SeqRepr& seq, ReprKind kind, const SymbolVocab& vocab) {
  if (seq.kind != kind) {
    throw KindMismatchError(std::string("encoder expects ") + to_string(kind) +
                            " input, got " + to_string(seq.kind));
  }
  if (seq.empty()) throw EmptyInputError("encoder: empty sequence");
  if (kind != ReprKind::kArticulatory) {
    for (auto id : seq.ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab.rows()) {
        throw InvalidArgument("encoder: symbol id outside the vocabulary");
      }
    }
  }
}

// Runs one LSTM direction over a padded batch. At step t, row r reads
// position t (forward) or len_r - 1 - t (backward) and is frozen once t
// passes its length. Returns the final packed state [h | c].
template <typename Scalar, typename SideT, typename Weights>
nn::NodeId run_direction(nn::Graph<Scalar>& g, SideT& side, Weights& w,
                         std::span<const SeqRepr* const> seqs, bool reverse,
                         nn::NodeId input, nn::NodeId input_bias) {
  const std::size_t m = seqs.size();
  const std::size_t h = w.hidden();
  std::size_t steps = 0;
  for (const auto* s : seqs) steps = std::max(steps, s->length());

  const nn::NodeId W = g.parameter(w.W);
  const nn::NodeId U = g.parameter(w.U);
  const nn::NodeId b = g.parameter(w.b);
  nn::NodeId hc = g.constant(nn::Tensor<Scalar>::zeros({m, 2 * h}));
  const bool features = side.has_bias();

  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<std::uint8_t> mask(m, 0);
    nn::NodeId x;
    if (features) {
      auto rows = nn::Tensor<Scalar>::zeros({m, kFeatureDim});
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t len = seqs[r]->length();
        if (t >= len) continue;
        mask[r] = 1;
        const auto& fr = seqs[r]->rows[reverse ? len - 1 - t : t];
        for (std::size_t k = 0; k < kFeatureDim; ++k) rows(r, k) = static_cast<Scalar>(fr[k]);
      }
      x = nn::add_row(g, nn::matmul(g, g.constant(std::move(rows)), input), input_bias);
    } else {
      std::vector<std::int32_t> ids(m, 0);
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t len = seqs[r]->length();
        if (t >= len) continue;
        mask[r] = 1;
        ids[r] = seqs[r]->ids[reverse ? len - 1 - t : t];
      }
      x = nn::gather_rows(g, input, std::move(ids));
    }
    hc = nn::lstm_state(g, nn::lstm_gates(g, x, hc, W, U, b), hc, std::move(mask));
  }
  return hc;
}

}  // namespace detail

// Encodes a batch of sequences with one side of the model. The result is an
// m × 2h node whose rows are [forward final h | backward final h].
// `SideT` may be const (no gradients recorded into the parameters).
template <typename Scalar, typename SideT>
nn::NodeId encode_batch(nn::Graph<Scalar>& g, SideT& side, ReprKind kind,
                        const SymbolVocab& vocab, std::span<const SeqRepr* const> seqs) {
  if (seqs.empty()) throw EmptyInputError("encode_batch: no sequences");
  for (const auto* s : seqs) detail::check_sequence(*s, kind, vocab);
  const std::size_t h = side.fwd.hidden();
  const nn::NodeId input = g.parameter(side.input);
  const nn::NodeId bias = side.has_bias() ? g.parameter(side.input_bias) : nn::NodeId{};
  const nn::NodeId f = detail::run_direction(g, side, side.fwd, seqs, false, input, bias);
  const nn::NodeId r = detail::run_direction(g, side, side.bwd, seqs, true, input, bias);
  return nn::concat_cols(g, nn::slice_cols(g, f, 0, h), nn::slice_cols(g, r, 0, h));
}

template <typename Scalar>
nn::Tensor<Scalar> encode_many(const EncoderParams<Scalar>& params, Side side,
                               std::span<const SeqRepr* const> seqs) {
  nn::Graph<Scalar> g;
  const nn::NodeId out = encode_batch(g, params.side(side), params.kind, params.vocab(side), seqs);
  return g.value(out);
}

template <typename Scalar>
nn::Tensor<Scalar> encode_many(const EncoderParams<Scalar>& params, Side side,
                               std::span<const SeqRepr> seqs) {
  std::vector<const SeqRepr*> ptrs;
  for (const auto& s : seqs) ptrs.push_back(&s);
  return encode_many(params, side, std::span<const SeqRepr* const>(ptrs));
}

// Source-language encoder output for one sequence (length 2·hidden).
template <typename Scalar>
std::vector<Scalar> encode_src(const EncoderParams<Scalar>& params, const SeqRepr& seq) {
  const SeqRepr* one[] = {&seq};
  const auto out = encode_many(params, Side::kSource, std::span<const SeqRepr* const>(one));
  return {out.data.begin(), out.data.end()};
}

template <typename Scalar>
std::vector<Scalar> encode_en(const EncoderParams<Scalar>& params, const SeqRepr& seq) {
  const SeqRepr* one[] = {&seq};
  const auto out = encode_many(params, Side::kEnglish, std::span<const SeqRepr* const>(one));
  return {out.data.begin(), out.data.end()};
}

// Max-margin loss with in-batch negatives: cosine similarities between all
// source and English encodings of the batch, hinge against every off-diagonal
// entry, averaged over negatives and then over pairs.
template <typename Scalar, typename ParamsT>
nn::NodeId build_batch_loss(nn::Graph<Scalar>& g, ParamsT& params,
                            std::span<const SeqRepr* const> src,
                            std::span<const SeqRepr* const> en, Scalar margin) {
  if (src.size() != en.size()) throw InvalidArgument("batch_loss: side sizes differ");
  if (src.size() < 2) throw InvalidArgument("batch_loss: batch needs at least 2 pairs");
  if (!(margin > Scalar(0))) throw InvalidArgument("batch_loss: margin must be positive");
  const nn::NodeId vs =
      encode_batch(g, params.src, params.kind, params.src_vocab, src);
  const nn::NodeId ve =
      encode_batch(g, params.en, params.kind, params.en_vocab, en);
  const nn::NodeId sims = nn::matmul_nt(g, nn::row_normalize(g, vs), nn::row_normalize(g, ve));
  return nn::in_batch_hinge(g, sims, margin);
}

template <typename Scalar>
Scalar batch_loss(const EncoderParams<Scalar>& params, std::span<const SeqRepr> src,
                  std::span<const SeqRepr> en, Scalar margin) {
  std::vector<const SeqRepr*> s, e;
  for (const auto& x : src) s.push_back(&x);
  for (const auto& x : en) e.push_back(&x);
  nn::Graph<Scalar> g;
  const nn::NodeId loss = build_batch_loss(g, params, std::span<const SeqRepr* const>(s),
                                           std::span<const SeqRepr* const>(e), margin);
  return g.value(loss).item();
}

}  // namespace pbel
