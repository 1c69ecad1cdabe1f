// Copyright 2026 The SGIR Authors.
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

#include "sgir/checkpoint.h"

#include <fmt/format.h>

#include "sgir/binary_io.h"
#include "sgir/corpus_io.h"
#include "sgir/error.h"

namespace sgir {

std::string SerializeParams(const ParamStore& store) {
  ByteWriter w;
  w.Bytes(std::string_view(kCheckpointMagic, 4));
  w.U32(kCheckpointVersion);
  w.U64(store.size());
  for (const auto& [name, entry] : store.entries()) {
    w.U32(static_cast<std::uint32_t>(name.size()));
    w.Bytes(name);
    w.U32(static_cast<std::uint32_t>(entry.value.rank()));
    for (const std::int64_t d : entry.value.shape()) {
      w.U64(static_cast<std::uint64_t>(d));
    }
    for (const double v : entry.value.data()) w.F64(v);
  }
  return w.Release();
}

ParamStore ParseParams(std::string_view bytes, std::uint64_t seed) {
  ByteReader r(bytes);
  if (r.Bytes(4) != std::string_view(kCheckpointMagic, 4)) {
    throw Error(ErrorCode::kMalformedFile, "not an SGIR checkpoint");
  }
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kMalformedFile,
                fmt::format("unsupported checkpoint version {}", version));
  }
  const std::uint64_t count = r.U64();
  ParamStore store(seed);
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint32_t name_len = r.U32();
    std::string name(r.Bytes(name_len));
    const std::uint32_t rank = r.U32();
    if (rank > 8) throw Error(ErrorCode::kMalformedFile, "implausible rank");
    std::vector<std::int64_t> shape(rank);
    std::uint64_t n = 1;
    for (auto& d : shape) {
      const std::uint64_t dim = r.U64();
      n *= dim;
      if (n > r.remaining() / 8 + 1) {
        throw Error(ErrorCode::kMalformedFile, "payload larger than file");
      }
      d = static_cast<std::int64_t>(dim);
    }
    std::vector<double> data(n);
    for (double& v : data) v = r.F64();
    if (store.Contains(name)) {
      throw Error(ErrorCode::kMalformedFile,
                  fmt::format("duplicate parameter '{}'", name));
    }
    store.Set(name, Tensor(std::move(shape), std::move(data)));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kMalformedFile, "trailing bytes after parameters");
  }
  return store;
}

void WriteParams(const std::filesystem::path& path, const ParamStore& store) {
  WriteTextFile(path, SerializeParams(store));
}

ParamStore ReadParams(const std::filesystem::path& path, std::uint64_t seed) {
  return ParseParams(ReadTextFile(path), seed);
}

}  // namespace sgir
