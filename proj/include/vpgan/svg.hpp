// Copyright 2026 The vpgan Authors
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

#ifndef VPGAN_SVG_HPP
#define VPGAN_SVG_HPP

#include <algorithm>
#include <filesystem>
#include <string>

#include "vpgan/detail/binary_io.hpp"
#include "vpgan/detail/text.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/projection.hpp"

namespace vpgan {

inline constexpr char kRealColor[] = "#2ca02c";       // green
inline constexpr char kGeneratedColor[] = "#9467bd";  // purple

// Viewport mapping from data coordinates to pixels. The parameters are
// also embedded as data-* attributes on the <svg> root, so a reader can
// invert the transform exactly:
//   px = margin + (x - min_x) * (size - 2*margin) / range_x
//   py = size - margin - (y - min_y) * (size - 2*margin) / range_y
struct SvgViewport {
  double size = 640.0;
  double margin = 40.0;
  double min_x = 0.0, min_y = 0.0;
  double range_x = 1.0, range_y = 1.0;

  double px(double x) const {
    return margin + (x - min_x) * (size - 2.0 * margin) / range_x;
  }
  double py(double y) const {
    return size - margin - (y - min_y) * (size - 2.0 * margin) / range_y;
  }
};

inline SvgViewport fit_viewport(const Projection2D& proj) {
  SvgViewport vp;
  if (proj.n == 0) return vp;
  double min_x = proj.xy[0], max_x = proj.xy[0];
  double min_y = proj.xy[1], max_y = proj.xy[1];
  for (std::size_t i = 0; i < proj.n; ++i) {
    min_x = std::min(min_x, proj.xy[i * 2]);
    max_x = std::max(max_x, proj.xy[i * 2]);
    min_y = std::min(min_y, proj.xy[i * 2 + 1]);
    max_y = std::max(max_y, proj.xy[i * 2 + 1]);
  }
  vp.min_x = min_x;
  vp.min_y = min_y;
  vp.range_x = max_x > min_x ? max_x - min_x : 1.0;
  vp.range_y = max_y > min_y ? max_y - min_y : 1.0;
  return vp;
}

// Scatter plot of a 2-D projection, real points green and generated
// points purple. Output is a pure function of the projection: fixed
// input, identical bytes.
inline void render_overlap(const Projection2D& proj,
                           const std::filesystem::path& path) {
  const SvgViewport vp = fit_viewport(proj);
  auto d = [](double v) { return detail::double_to_string(v); };
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + d(vp.size) +
         "\" height=\"" + d(vp.size) + "\" data-margin=\"" + d(vp.margin) +
         "\" data-min-x=\"" + d(vp.min_x) + "\" data-min-y=\"" + d(vp.min_y) +
         "\" data-range-x=\"" + d(vp.range_x) + "\" data-range-y=\"" +
         d(vp.range_y) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < proj.n; ++i) {
    const char* color =
        proj.labels[i] == PointLabel::kReal ? kRealColor : kGeneratedColor;
    svg += "<circle cx=\"" + d(vp.px(proj.xy[i * 2])) + "\" cy=\"" +
           d(vp.py(proj.xy[i * 2 + 1])) + "\" r=\"3\" fill=\"" + color +
           "\" fill-opacity=\"0.6\"/>\n";
  }
  svg += "</svg>\n";
  detail::write_file_atomic(path, svg);
}

// Companion CSV of the projected points.
inline void write_projection_csv(const Projection2D& proj,
                                 const std::filesystem::path& path) {
  std::string out = "x,y,label\n";
  for (std::size_t i = 0; i < proj.n; ++i) {
    out += detail::double_to_string(proj.xy[i * 2]);
    out += ',';
    out += detail::double_to_string(proj.xy[i * 2 + 1]);
    out += ',';
    out += proj.labels[i] == PointLabel::kReal ? "real" : "generated";
    out += '\n';
  }
  detail::write_file_atomic(path, out);
}

}  // namespace vpgan

#endif  // VPGAN_SVG_HPP
