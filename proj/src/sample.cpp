// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/sample.hpp"

namespace dualground {

std::string_view to_string(Platform p) {
  switch (p) {
    case Platform::kMobile:
      return "mobile";
    case Platform::kDesktop:
      return "desktop";
    case Platform::kWeb:
      return "web";
  }
  return "web";
}

std::string_view to_string(ElementKind k) {
  return k == ElementKind::kText ? "text" : "icon_widget";
}

std::optional<Platform> parse_platform(std::string_view s) {
  if (s == "mobile") return Platform::kMobile;
  if (s == "desktop") return Platform::kDesktop;
  if (s == "web") return Platform::kWeb;
  return std::nullopt;
}

std::optional<ElementKind> parse_element_kind(std::string_view s) {
  if (s == "text") return ElementKind::kText;
  if (s == "icon_widget" || s == "icon") return ElementKind::kIconWidget;
  return std::nullopt;
}

}  // namespace dualground
