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

#ifndef SGIR_BINARY_IO_H_
#define SGIR_BINARY_IO_H_

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace sgir {

// Little-endian encoder independent of host byte order.
class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) { Put(v, 4); }
  void U64(std::uint64_t v) { Put(v, 8); }
  void F64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    Put(bits, 8);
  }
  void Bytes(std::string_view bytes) { out_.append(bytes); }

  const std::string& str() const { return out_; }
  std::string Release() { return std::move(out_); }

 private:
  void Put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  std::string out_;
};

// Throws MalformedFile on reads past the end.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t U8() { return static_cast<std::uint8_t>(Get(1)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Get(4)); }
  std::uint64_t U64() { return Get(8); }
  double F64() {
    const std::uint64_t bits = Get(8);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string_view Bytes(std::size_t n);

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t Get(int n);

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace sgir

#endif  // SGIR_BINARY_IO_H_
