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

#include <optional>
#include <string>

#include "json.hpp"
#include "pbel/binary_io.hpp"
#include "pbel/encoder/params.hpp"

namespace pbel {

// Checkpoint layout:
//   "PBEL" | u16 version | u32 metadata length | metadata (UTF-8 JSON)
//   | u32 tensor count | per tensor: u16 name length, name, u8 rank,
//   u32 dims…, little-endian float32 data
// Tensors appear in EncoderParams::parameters() order.
inline constexpr char kCheckpointMagic[4] = {'P', 'B', 'E', 'L'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

inline std::string serialize_checkpoint(const EncoderParams<float>& p) {
  nlohmann::ordered_json meta;
  meta["repr"] = to_string(p.kind);
  meta["margin"] = p.margin;
  meta["embed_dim"] = p.dims.embed;
  meta["hidden_dim"] = p.dims.hidden;
  meta["src_lang"] = p.src_lang;
  meta["en_lang"] = p.en_lang;
  meta["src_vocab_hash"] = hex64(p.src_vocab.fingerprint());
  meta["en_vocab_hash"] = hex64(p.en_vocab.fingerprint());
  meta["feature_table_hash"] = hex64(p.feature_table_hash);
  meta["src_vocab"] = p.src_vocab.symbols();
  meta["en_vocab"] = p.en_vocab.symbols();
  auto tensors = nlohmann::ordered_json::array();
  const auto params = p.parameters();
  for (const auto* t : params) {
    tensors.push_back({{"name", t->name}, {"shape", t->value.shape}});
  }
  meta["tensors"] = std::move(tensors);

  io::ByteWriter w;
  w.bytes(std::string_view(kCheckpointMagic, 4));
  w.u16(kCheckpointVersion);
  w.str32(meta.dump());
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto* t : params) {
    w.str16(t->name);
    w.u8(static_cast<std::uint8_t>(t->value.shape.size()));
    for (auto d : t->value.shape) w.u32(static_cast<std::uint32_t>(d));
    w.f32s(t->value.data);
  }
  return w.take();
}

// Content hash of the serialized parameters; ties a KB index to the model
// that produced it.
inline std::uint64_t params_fingerprint(const EncoderParams<float>& p) {
  return fnv1a(serialize_checkpoint(p));
}

inline EncoderParams<float> deserialize_checkpoint(std::string_view bytes,
                                                   std::optional<ReprKind> expect = std::nullopt,
                                                   const std::string& what = "checkpoint") {
  io::ByteReader r(bytes, what);
  if (r.bytes(4) != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError(what + ": bad magic (not a checkpoint file)");
  }
  const auto version = r.u16();
  if (version != kCheckpointVersion) {
    throw FormatError(what + ": unsupported format version " + std::to_string(version));
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(r.str32());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(what + ": corrupt metadata: " + e.what());
  }

  EncoderParams<float> p;
  std::vector<std::string> src_symbols, en_symbols;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> declared;
  try {
    p.kind = parse_repr_kind(meta.at("repr").get<std::string>());
    p.margin = meta.at("margin").get<double>();
    p.dims.embed = meta.at("embed_dim").get<std::size_t>();
    p.dims.hidden = meta.at("hidden_dim").get<std::size_t>();
    p.src_lang = meta.at("src_lang").get<std::string>();
    p.en_lang = meta.at("en_lang").get<std::string>();
    p.feature_table_hash = parse_hex64(meta.at("feature_table_hash").get<std::string>());
    src_symbols = meta.at("src_vocab").get<std::vector<std::string>>();
    en_symbols = meta.at("en_vocab").get<std::vector<std::string>>();
    for (const auto& t : meta.at("tensors")) {
      declared.emplace_back(t.at("name").get<std::string>(),
                            t.at("shape").get<std::vector<std::size_t>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(what + ": incomplete metadata: " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(what + ": " + e.what());
  }
  if (expect && *expect != p.kind) {
    throw KindMismatchError(what + ": holds a " + std::string(to_string(p.kind)) +
                            " model, expected " + to_string(*expect));
  }
  const ReprKind vocab_kind = p.kind == ReprKind::kArticulatory ? ReprKind::kPhoneme : p.kind;
  try {
    p.src_vocab = SymbolVocab(vocab_kind, std::move(src_symbols));
    p.en_vocab = SymbolVocab(vocab_kind, std::move(en_symbols));
  } catch (const InvalidArgument& e) {
    throw FormatError(what + ": bad vocabulary: " + e.what());
  }
  if (hex64(p.src_vocab.fingerprint()) != meta.at("src_vocab_hash") ||
      hex64(p.en_vocab.fingerprint()) != meta.at("en_vocab_hash")) {
    throw FormatError(what + ": vocabulary hash mismatch");
  }

  // Expected layout comes from a freshly shaped model; every stored tensor
  // must match it by name and shape.
  EncoderParams<float> shaped = EncoderParams<float>::init(
      p.kind, p.dims, p.src_vocab, p.en_vocab, 0, p.feature_table_hash);
  p.src = std::move(shaped.src);
  p.en = std::move(shaped.en);
  auto params = p.parameters();
  if (declared.size() != params.size()) {
    throw FormatError(what + ": expected " + std::to_string(params.size()) +
                      " tensors, metadata lists " + std::to_string(declared.size()));
  }
  const auto count = r.u32();
  if (count != params.size()) throw FormatError(what + ": tensor count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& t = *params[i];
    const std::string name = r.str16();
    const auto rank = r.u8();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = r.u32();
    if (name != t.name || shape != t.value.shape || declared[i].first != name ||
        declared[i].second != shape) {
      throw FormatError(what + ": tensor " + std::to_string(i) + " ('" + name + "' " +
                        nn::shape_string(shape) + ") inconsistent with model layout ('" + t.name +
                        "' " + nn::shape_string(t.value.shape) + ")");
    }
    r.f32s(t.value.data);
    if (!t.value.all_finite()) throw FormatError(what + ": non-finite values in " + name);
    t.zero_grad();
  }
  if (!r.done()) throw FormatError(what + ": trailing bytes after last tensor");
  return p;
}

inline void save_checkpoint(const EncoderParams<float>& p, const std::string& path) {
  io::write_file(path, serialize_checkpoint(p));
}

inline EncoderParams<float> load_checkpoint(const std::string& path,
                                            std::optional<ReprKind> expect = std::nullopt) {
  return deserialize_checkpoint(io::read_file(path), expect, path);
}

}  // namespace pbel
