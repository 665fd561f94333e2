/*
 * Copyright 2026 The OTS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef OTS_SRC_BINARY_IO_HPP_
#define OTS_SRC_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "ots/error.hpp"

namespace ots::binary {

// Little-endian encoding regardless of host order.
template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xff));
    }
    return out;
  }
  return v;
}

inline void put_u32(std::string& out, std::uint32_t v) {
  v = to_little(v);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

inline void put_u64(std::string& out, std::uint64_t v) {
  v = to_little(v);
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

inline void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_string(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

// Bounds-checked cursor; any overrun is a kMalformedFile error.
class Reader {
 public:
  Reader(std::string_view data, std::string context)
      : data_(data), context_(std::move(context)) {}

  std::size_t position() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  std::string_view bytes(std::size_t n) {
    if (data_.size() - pos_ < n) fail(ErrorKind::kMalformedFile, context_ + ": truncated");
    const std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, bytes(4).data(), 4);
    return to_little(v);
  }
  std::uint64_t u64() {
    std::uint64_t v;
    std::memcpy(&v, bytes(8).data(), 8);
    return to_little(v);
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string string() {
    const std::uint32_t n = u32();
    return std::string(bytes(n));
  }

 private:
  std::string_view data_;
  std::string context_;
  std::size_t pos_ = 0;
};

}  // namespace ots::binary

#endif  // OTS_SRC_BINARY_IO_HPP_
