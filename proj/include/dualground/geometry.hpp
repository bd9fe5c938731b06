// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dualground {

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point in normalized screen space: fractions of width and height.
class NormPoint {
 public:
  /// Throws GeometryError unless both coordinates lie in [0, 1].
  NormPoint(double x, double y);

  double x() const { return x_; }
  double y() const { return y_; }

  friend bool operator==(const NormPoint&, const NormPoint&) = default;

 private:
  double x_;
  double y_;
};

/// Axis-aligned box in normalized screen space. Zero-area boxes are legal.
class NormBBox {
 public:
  NormBBox(double x_min, double y_min, double x_max, double y_max);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }

  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }

  /// Component-wise containment of another box.
  bool contains(const NormBBox& other) const;

  friend bool operator==(const NormBBox&, const NormBBox&) = default;

 private:
  double x_min_;
  double y_min_;
  double x_max_;
  double y_max_;
};

struct ScreenshotRef {
  std::string uri;
  std::int64_t width_px = 0;
  std::int64_t height_px = 0;

  /// Throws GeometryError when either dimension is not positive.
  void validate() const;

  friend bool operator==(const ScreenshotRef&, const ScreenshotRef&) = default;
};

/// Pixel-space box as (left, top, right, bottom).
struct PixelBox {
  std::int64_t left = 0;
  std::int64_t top = 0;
  std::int64_t right = 0;
  std::int64_t bottom = 0;

  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

// Inclusive on all four sides, no tolerance.
bool hit(const NormPoint& p, const NormBBox& b);

NormPoint center(const NormBBox& b);

/// Divides x coordinates by the screenshot width and y coordinates by its
/// height. Throws GeometryError for inverted or out-of-frame boxes.
NormBBox normalize_bbox(const PixelBox& box, const ScreenshotRef& shot);

}  // namespace dualground
