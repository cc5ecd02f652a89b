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
#include "pbel/linker/index.hpp"

namespace pbel {

// Index cache layout:
//   "PBIX" | u16 version | u32 metadata length | metadata (UTF-8 JSON)
//   | u64 entity ids × N | u32 pivot→entry rows × P
//   | float32 English matrix N×dim | float32 pivot matrix P×dim
// All integers and floats little-endian.
inline constexpr char kIndexMagic[4] = {'P', 'B', 'I', 'X'};
inline constexpr std::uint16_t kIndexVersion = 1;

inline std::string serialize_index(const KbIndex& idx) {
  nlohmann::ordered_json meta;
  meta["pivot_lang"] = idx.pivot_lang;
  meta["repr"] = to_string(idx.kind);
  meta["dim"] = idx.dim;
  meta["params_fingerprint"] = hex64(idx.params_fingerprint);
  meta["kb_fingerprint"] = hex64(idx.kb_fingerprint);
  meta["entries"] = idx.size();
  meta["pivot_rows"] = idx.pivot_rows();

  io::ByteWriter w;
  w.bytes(std::string_view(kIndexMagic, 4));
  w.u16(kIndexVersion);
  w.str32(meta.dump());
  for (auto id : idx.ids) w.u64(id);
  for (auto r : idx.pivot_entry) w.u32(r);
  w.f32s(idx.english);
  w.f32s(idx.pivot);
  return w.take();
}

struct IndexExpectation {
  std::optional<ReprKind> kind;
  std::optional<std::uint64_t> params_fingerprint;
  std::optional<std::uint64_t> kb_fingerprint;
};

inline KbIndex deserialize_index(std::string_view bytes, const IndexExpectation& expect = {},
                                 const std::string& what = "index cache") {
  io::ByteReader r(bytes, what);
  if (r.bytes(4) != std::string_view(kIndexMagic, 4)) {
    throw FormatError(what + ": bad magic (not an index cache)");
  }
  const auto version = r.u16();
  if (version != kIndexVersion) {
    throw FormatError(what + ": unsupported format version " + std::to_string(version));
  }
  KbIndex idx;
  std::size_t n = 0, p = 0;
  try {
    const auto meta = nlohmann::json::parse(r.str32());
    idx.pivot_lang = meta.at("pivot_lang").get<std::string>();
    idx.kind = parse_repr_kind(meta.at("repr").get<std::string>());
    idx.dim = meta.at("dim").get<std::size_t>();
    idx.params_fingerprint = parse_hex64(meta.at("params_fingerprint").get<std::string>());
    idx.kb_fingerprint = parse_hex64(meta.at("kb_fingerprint").get<std::string>());
    n = meta.at("entries").get<std::size_t>();
    p = meta.at("pivot_rows").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(what + ": bad metadata: " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(what + ": " + e.what());
  }
  if (expect.kind && *expect.kind != idx.kind) {
    throw KindMismatchError(what + ": holds a " + std::string(to_string(idx.kind)) +
                            " index, expected " + to_string(*expect.kind));
  }
  if (expect.params_fingerprint && *expect.params_fingerprint != idx.params_fingerprint) {
    throw IndexMismatchError(what + ": built with different encoder parameters");
  }
  if (expect.kb_fingerprint && *expect.kb_fingerprint != idx.kb_fingerprint) {
    throw IndexMismatchError(what + ": built from a different knowledge base");
  }
  // Sizes come from untrusted metadata; bound them (so the product below
  // cannot overflow) and check them against the payload before allocating.
  if (idx.dim == 0 || idx.dim > (1u << 16) || n == 0 || n > 0xFFFFFFFFu || p > n) {
    throw FormatError(what + ": implausible sizes in metadata");
  }
  const std::size_t need = n * 8 + p * 4 + (n + p) * idx.dim * 4;
  if (r.remaining() != need) {
    throw FormatError(what + ": payload size does not match metadata");
  }
  idx.ids.resize(n);
  for (auto& id : idx.ids) id = r.u64();
  idx.pivot_entry.resize(p);
  idx.entry_pivot.assign(n, kNoPivot);
  for (std::size_t k = 0; k < p; ++k) {
    idx.pivot_entry[k] = r.u32();
    if (idx.pivot_entry[k] >= n || idx.entry_pivot[idx.pivot_entry[k]] != kNoPivot) {
      throw FormatError(what + ": pivot map is not injective into entries");
    }
    idx.entry_pivot[idx.pivot_entry[k]] = static_cast<std::int32_t>(k);
  }
  idx.english.resize(n * idx.dim);
  idx.pivot.resize(p * idx.dim);
  r.f32s(idx.english);
  r.f32s(idx.pivot);
  try {
    idx.validate();
  } catch (const FormatError& e) {
    throw FormatError(what + ": " + e.what());
  }
  return idx;
}

inline void save_index(const KbIndex& idx, const std::string& path) {
  io::write_file(path, serialize_index(idx));
}

inline KbIndex load_index(const std::string& path, const IndexExpectation& expect = {}) {
  return deserialize_index(io::read_file(path), expect, path);
}

}  // namespace pbel
