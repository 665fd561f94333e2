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

#include "ots/image.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "ots/error.hpp"
#include "ots/text_io.hpp"

namespace ots {
namespace {

struct PgmHeader {
  bool binary = true;
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

PgmHeader parse_header(const std::string& bytes, const std::string& name) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    fail(ErrorKind::kMalformedFile, name + ": not a P5/P2 PGM");
  }
  PgmHeader h;
  h.binary = bytes[1] == '5';
  std::size_t pos = 2;
  auto next_int = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) fail(ErrorKind::kMalformedFile, name + ": bad PGM header");
    return std::stoi(bytes.substr(start, pos - start));
  };
  h.width = next_int();
  h.height = next_int();
  h.maxval = next_int();
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535) {
    fail(ErrorKind::kMalformedFile, name + ": bad PGM dimensions");
  }
  h.data_offset = pos + 1;  // single whitespace after maxval
  return h;
}

}  // namespace

PixelGrid::PixelGrid(int width, int height, std::vector<double> intensities)
    : width_(width), height_(height), data_(std::move(intensities)) {
  if (width <= 0 || height <= 0) {
    fail(ErrorKind::kDegenerateImage, "image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorKind::kInvalidArgument, "intensity count != width*height");
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorKind::kInvalidArgument, "intensity outside [0,1]");
    }
  }
}

PixelGrid::PixelGrid(int width, int height, double fill)
    : PixelGrid(width, height,
                std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                        std::max(height, 0),
                                    fill)) {}

void PixelGrid::set(int x, int y, double v) {
  if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::kInvalidArgument, "intensity outside [0,1]");
  data_[static_cast<std::size_t>(y) * width_ + x] = v;
}

PixelGrid PixelGrid::crop(const Rect& r) const {
  check_region(r, size());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(r.area()));
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) out.push_back(at(x, y));
  }
  return PixelGrid(r.w, r.h, std::move(out));
}

ImageSize read_pgm_size(const std::filesystem::path& path) {
  const std::string bytes = text::read_file(path);
  const PgmHeader h = parse_header(bytes, path.string());
  return {h.width, h.height};
}

PixelGrid load_pgm(const std::filesystem::path& path) {
  const std::string bytes = text::read_file(path);
  const PgmHeader h = parse_header(bytes, path.string());
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
  std::vector<double> values(count);
  if (h.binary) {
    const std::size_t bpp = h.maxval > 255 ? 2 : 1;
    if (bytes.size() < h.data_offset + count * bpp) {
      fail(ErrorKind::kMalformedFile, path.string() + ": truncated PGM");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + h.data_offset);
    for (std::size_t i = 0; i < count; ++i) {
      const int raw = bpp == 2 ? (p[2 * i] << 8) | p[2 * i + 1] : p[i];
      values[i] = std::min(1.0, static_cast<double>(raw) / h.maxval);
    }
  } else {
    std::size_t pos = h.data_offset;
    for (std::size_t i = 0; i < count; ++i) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      std::size_t start = pos;
      while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (start == pos) fail(ErrorKind::kMalformedFile, path.string() + ": truncated PGM");
      values[i] = std::min(1.0, std::stod(bytes.substr(start, pos - start)) / h.maxval);
    }
  }
  return PixelGrid(h.width, h.height, std::move(values));
}

void save_pgm(const PixelGrid& image, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n65535\n";
  for (double v : image.intensities()) {
    const auto raw = static_cast<unsigned>(std::lround(v * 65535.0));
    out += static_cast<char>((raw >> 8) & 0xff);
    out += static_cast<char>(raw & 0xff);
  }
  text::write_file_atomic(path, out);
}

}  // namespace ots
