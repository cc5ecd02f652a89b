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

#include <cstdint>
#include <string>
#include <vector>

#include "pbel/numerics/lstm.hpp"
#include "pbel/representation/representation.hpp"

namespace pbel {

struct ModelDims {
  std::size_t embed = 64;
  std::size_t hidden = 512;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

enum class Side : std::uint8_t { kSource, kEnglish };

// One side of the similarity model: input layer plus a forward and a
// backward LSTM. For symbol input, `input` is the |V|×E embedding table; for
// articulatory input it is the 21×E projection with `input_bias` (1×E).
template <typename Scalar>
struct SideEncoder {
  nn::Parameter<Scalar> input;
  nn::Parameter<Scalar> input_bias;
  nn::LstmWeights<Scalar> fwd;
  nn::LstmWeights<Scalar> bwd;

  bool has_bias() const { return !input_bias.value.empty(); }

  template <typename P>
  static void collect(P& self, std::vector<decltype(&self.input)>& out) {
    out.push_back(&self.input);
    if (self.has_bias()) out.push_back(&self.input_bias);
    for (auto* p : self.fwd.parameters()) out.push_back(p);
    for (auto* p : self.bwd.parameters()) out.push_back(p);
  }
};

// All trainable tensors of one source-language/English encoder pair, with the
// vocabularies they were trained against.
template <typename Scalar>
struct EncoderParams {
  ReprKind kind = ReprKind::kGrapheme;
  ModelDims dims;
  double margin = 0.5;
  std::string src_lang;
  std::string en_lang = "en";
  SymbolVocab src_vocab;
  SymbolVocab en_vocab;
  std::uint64_t feature_table_hash = 0;
  SideEncoder<Scalar> src;
  SideEncoder<Scalar> en;

  std::size_t output_dim() const { return 2 * dims.hidden; }

  const SideEncoder<Scalar>& side(Side s) const { return s == Side::kSource ? src : en; }
  SideEncoder<Scalar>& side(Side s) { return s == Side::kSource ? src : en; }
  const SymbolVocab& vocab(Side s) const { return s == Side::kSource ? src_vocab : en_vocab; }

  // Declaration order: source side then English side; within a side the
  // input layer, then forward W/U/b, then backward W/U/b.
  std::vector<nn::Parameter<Scalar>*> parameters() {
    std::vector<nn::Parameter<Scalar>*> out;
    SideEncoder<Scalar>::collect(src, out);
    SideEncoder<Scalar>::collect(en, out);
    return out;
  }
  std::vector<const nn::Parameter<Scalar>*> parameters() const {
    std::vector<const nn::Parameter<Scalar>*> out;
    SideEncoder<Scalar>::collect(src, out);
    SideEncoder<Scalar>::collect(en, out);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->value.size();
    return n;
  }

  static SideEncoder<Scalar> init_side(const std::string& prefix, ReprKind kind,
                                       const ModelDims& dims, std::size_t vocab_rows,
                                       nn::Rng& rng) {
    SideEncoder<Scalar> side;
    const std::size_t in_rows = kind == ReprKind::kArticulatory ? kFeatureDim : vocab_rows;
    auto input = nn::Tensor<Scalar>::zeros({in_rows, dims.embed});
    for (auto& x : input.data) {
      x = static_cast<Scalar>(rng.uniform(-nn::kInitRange, nn::kInitRange));
    }
    if (kind == ReprKind::kArticulatory) {
      side.input = nn::Parameter<Scalar>(prefix + ".proj.W", std::move(input));
      side.input_bias =
          nn::Parameter<Scalar>(prefix + ".proj.b", nn::Tensor<Scalar>::zeros({1, dims.embed}));
    } else {
      side.input = nn::Parameter<Scalar>(prefix + ".embedding", std::move(input));
    }
    side.fwd = nn::LstmWeights<Scalar>::init(prefix + ".fwd", dims.embed, dims.hidden, rng);
    side.bwd = nn::LstmWeights<Scalar>::init(prefix + ".bwd", dims.embed, dims.hidden, rng);
    return side;
  }

  // Fresh parameters drawn from a PRNG seeded with `seed`.
  static EncoderParams init(ReprKind kind, const ModelDims& dims, SymbolVocab src_vocab,
                            SymbolVocab en_vocab, std::uint64_t seed,
                            std::uint64_t feature_table_hash = 0) {
    if (dims.embed == 0 || dims.hidden == 0) {
      throw InvalidArgument("model dimensions must be positive");
    }
    EncoderParams p;
    p.kind = kind;
    p.dims = dims;
    p.src_vocab = std::move(src_vocab);
    p.en_vocab = std::move(en_vocab);
    p.feature_table_hash = feature_table_hash;
    nn::Rng rng(seed);
    p.src = init_side("src", kind, dims, p.src_vocab.rows(), rng);
    p.en = init_side("en", kind, dims, p.en_vocab.rows(), rng);
    return p;
  }
};

}  // namespace pbel
