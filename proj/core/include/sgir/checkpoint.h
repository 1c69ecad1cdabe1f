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

#ifndef SGIR_CHECKPOINT_H_
#define SGIR_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "sgir/param_store.h"

namespace sgir {

inline constexpr char kCheckpointMagic[4] = {'S', 'G', 'I', 'R'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (little endian):
//   "SGIR" | version u32 | parameter count u64
//   per parameter, in name order:
//     name length u32 | UTF-8 name | rank u32 | dims u64 x rank |
//     float64 payload
std::string SerializeParams(const ParamStore& store);
// The returned store carries `seed` for any parameters created later.
ParamStore ParseParams(std::string_view bytes, std::uint64_t seed = 0);

void WriteParams(const std::filesystem::path& path, const ParamStore& store);
ParamStore ReadParams(const std::filesystem::path& path, std::uint64_t seed = 0);

}  // namespace sgir

#endif  // SGIR_CHECKPOINT_H_
