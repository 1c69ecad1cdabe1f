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

#include "sgir/binary_io.h"

#include "sgir/error.h"

namespace sgir {

std::string_view ByteReader::Bytes(std::size_t n) {
  if (n > remaining()) throw Error(ErrorCode::kMalformedFile, "truncated data");
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint64_t ByteReader::Get(int n) {
  if (static_cast<std::size_t>(n) > remaining()) {
    throw Error(ErrorCode::kMalformedFile, "truncated data");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i]))
         << (8 * i);
  }
  pos_ += n;
  return v;
}

}  // namespace sgir
