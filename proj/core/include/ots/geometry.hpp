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

#ifndef OTS_GEOMETRY_HPP_
#define OTS_GEOMETRY_HPP_

#include <optional>
#include <string>
#include <string_view>

namespace ots {

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// Pixel rectangle, top-left origin.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool contains(const Rect& other) const {
    return other.x >= x && other.y >= y && other.x + other.w <= x + w &&
           other.y + other.h <= y + h;
  }
  bool within(ImageSize size) const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= size.width &&
           y + h <= size.height;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Rect full_rect(ImageSize size) { return {0, 0, size.width, size.height}; }

// Throws kRegionOutOfBounds unless `r` is a valid rect inside `size`.
void check_region(const Rect& r, ImageSize size);

// Smallest square holding `r`, centred on it, shifted to stay inside the
// image. The side shrinks to min(width, height) only when the square
// cannot fit at all.
Rect smallest_square_containing(const Rect& r, ImageSize size);

// Geometric recipe applied to an image before extraction. Crop happens
// in original image coordinates; rotation is counterclockwise about the
// image centre; mirroring flips the cropped view horizontally.
struct TransformPlan {
  std::optional<Rect> crop;
  double rotation_degrees = 0.0;
  bool mirrored = false;

  Rect region(ImageSize size) const { return crop ? *crop : full_rect(size); }
  bool is_plain() const { return rotation_degrees == 0.0 && !mirrored; }

  friend bool operator==(const TransformPlan&, const TransformPlan&) = default;
};

inline TransformPlan identity_plan() { return {}; }
inline TransformPlan region_plan(const Rect& r) { return {r, 0.0, false}; }

// Region field of the extractor protocol: `x,y,w,h` with
// `;rot=<deg>;mir=<0|1>` appended when the plan rotates or mirrors.
std::string format_region_field(const TransformPlan& plan, ImageSize size);

struct RegionField {
  Rect rect;
  double rotation_degrees = 0.0;
  bool mirrored = false;
};
RegionField parse_region_field(std::string_view field);

}  // namespace ots

#endif  // OTS_GEOMETRY_HPP_
