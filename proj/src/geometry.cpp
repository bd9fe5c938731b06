// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/geometry.hpp"

#include <cmath>

#include <fmt/format.h>

namespace dualground {
namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

NormPoint::NormPoint(double x, double y) : x_(x), y_(y) {
  if (!in_unit_interval(x) || !in_unit_interval(y)) {
    throw GeometryError(fmt::format("point ({}, {}) outside [0,1]^2", x, y));
  }
}

NormBBox::NormBBox(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  if (!in_unit_interval(x_min) || !in_unit_interval(y_min) ||
      !in_unit_interval(x_max) || !in_unit_interval(y_max)) {
    throw GeometryError(fmt::format("box ({}, {}, {}, {}) outside [0,1]^2",
                                    x_min, y_min, x_max, y_max));
  }
  if (x_min > x_max || y_min > y_max) {
    throw GeometryError(fmt::format("inverted box ({}, {}, {}, {})", x_min,
                                    y_min, x_max, y_max));
  }
}

bool NormBBox::contains(const NormBBox& other) const {
  return x_min_ <= other.x_min_ && y_min_ <= other.y_min_ &&
         other.x_max_ <= x_max_ && other.y_max_ <= y_max_;
}

void ScreenshotRef::validate() const {
  if (width_px <= 0 || height_px <= 0) {
    throw GeometryError(fmt::format("screenshot '{}' has non-positive size {}x{}",
                                    uri, width_px, height_px));
  }
}

bool hit(const NormPoint& p, const NormBBox& b) {
  return b.x_min() <= p.x() && p.x() <= b.x_max() && b.y_min() <= p.y() &&
         p.y() <= b.y_max();
}

NormPoint center(const NormBBox& b) {
  return NormPoint((b.x_min() + b.x_max()) / 2.0,
                   (b.y_min() + b.y_max()) / 2.0);
}

NormBBox normalize_bbox(const PixelBox& box, const ScreenshotRef& shot) {
  shot.validate();
  if (box.left > box.right || box.top > box.bottom) {
    throw GeometryError(fmt::format("inverted pixel box ({}, {}, {}, {})",
                                    box.left, box.top, box.right, box.bottom));
  }
  if (box.left < 0 || box.top < 0 || box.right > shot.width_px ||
      box.bottom > shot.height_px) {
    throw GeometryError(fmt::format(
        "pixel box ({}, {}, {}, {}) outside {}x{} frame", box.left, box.top,
        box.right, box.bottom, shot.width_px, shot.height_px));
  }
  const auto w = static_cast<double>(shot.width_px);
  const auto h = static_cast<double>(shot.height_px);
  return NormBBox(static_cast<double>(box.left) / w,
                  static_cast<double>(box.top) / h,
                  static_cast<double>(box.right) / w,
                  static_cast<double>(box.bottom) / h);
}

}  // namespace dualground
