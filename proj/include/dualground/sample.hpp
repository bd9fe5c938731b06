// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "dualground/geometry.hpp"

namespace dualground {

enum class Platform { kMobile, kDesktop, kWeb };
enum class ElementKind { kText, kIconWidget };

std::string_view to_string(Platform p);
std::string_view to_string(ElementKind k);

/// Accepts the names produced by to_string. "icon" is also read as
/// IconWidget. Returns nullopt for anything else.
std::optional<Platform> parse_platform(std::string_view s);
std::optional<ElementKind> parse_element_kind(std::string_view s);

/// An (instruction, target box, screenshot) triplet plus the tags used for
/// per-platform and per-kind breakdowns.
struct GroundingSample {
  std::string id;
  std::string instruction;
  NormBBox bbox{0, 0, 0, 0};
  ScreenshotRef screenshot;
  Platform platform = Platform::kWeb;
  ElementKind element_kind = ElementKind::kText;
  std::string source;
  /// Free-form grouping tag (e.g. application category); carried through
  /// evaluation when present.
  std::optional<std::string> category;

  friend bool operator==(const GroundingSample&, const GroundingSample&) =
      default;
};

}  // namespace dualground
