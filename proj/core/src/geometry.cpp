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

#include "ots/geometry.hpp"

#include <algorithm>

#include "ots/error.hpp"
#include "ots/text_io.hpp"

namespace ots {

void check_region(const Rect& r, ImageSize size) {
  if (!r.within(size)) {
    fail(ErrorKind::kRegionOutOfBounds,
         "region " + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
             std::to_string(r.w) + "," + std::to_string(r.h) +
             " outside image " + std::to_string(size.width) + "x" +
             std::to_string(size.height));
  }
}

Rect smallest_square_containing(const Rect& r, ImageSize size) {
  check_region(r, size);
  const int side = std::min({std::max(r.w, r.h), size.width, size.height});
  int x = r.x - (side - r.w) / 2;
  int y = r.y - (side - r.h) / 2;
  x = std::clamp(x, 0, size.width - side);
  y = std::clamp(y, 0, size.height - side);
  return {x, y, side, side};
}

std::string format_region_field(const TransformPlan& plan, ImageSize size) {
  const Rect r = plan.region(size);
  std::string out = std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                    std::to_string(r.w) + "," + std::to_string(r.h);
  if (!plan.is_plain()) {
    out += ";rot=" + text::format_double(plan.rotation_degrees);
    out += plan.mirrored ? ";mir=1" : ";mir=0";
  }
  return out;
}

RegionField parse_region_field(std::string_view field) {
  RegionField out;
  const auto parts = text::split(field, ';');
  const auto coords = text::split(parts[0], ',');
  if (coords.size() != 4) {
    fail(ErrorKind::kMalformedFile, "region field needs x,y,w,h");
  }
  out.rect = {static_cast<int>(text::parse_int(coords[0], "region x")),
              static_cast<int>(text::parse_int(coords[1], "region y")),
              static_cast<int>(text::parse_int(coords[2], "region w")),
              static_cast<int>(text::parse_int(coords[3], "region h"))};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string_view p = parts[i];
    if (p.starts_with("rot=")) {
      out.rotation_degrees = text::parse_double(p.substr(4), "region rot");
    } else if (p == "mir=0" || p == "mir=1") {
      out.mirrored = p.back() == '1';
    } else {
      fail(ErrorKind::kMalformedFile, "unknown region attribute " + std::string(p));
    }
  }
  return out;
}

}  // namespace ots
