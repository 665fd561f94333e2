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

#ifndef OTS_IMAGE_HPP_
#define OTS_IMAGE_HPP_

#include <filesystem>
#include <vector>

#include "ots/geometry.hpp"

namespace ots {

// Grayscale raster with intensities in [0, 1], row-major.
class PixelGrid {
 public:
  PixelGrid(int width, int height, std::vector<double> intensities);
  PixelGrid(int width, int height, double fill);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  ImageSize size() const noexcept { return {width_, height_}; }

  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int x, int y, double v);
  const std::vector<double>& intensities() const noexcept { return data_; }

  PixelGrid crop(const Rect& r) const;

 private:
  int width_;
  int height_;
  std::vector<double> data_;
};

// Minimal binary/ASCII PGM (P5/P2) support.
PixelGrid load_pgm(const std::filesystem::path& path);
ImageSize read_pgm_size(const std::filesystem::path& path);
void save_pgm(const PixelGrid& image, const std::filesystem::path& path);

}  // namespace ots

#endif  // OTS_IMAGE_HPP_
