// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dualground {

class PromptError : public std::invalid_argument {
 public:
  enum class Kind { kMissingContext, kMalformedTemplate };

  PromptError(Kind kind, const std::string& what)
      : std::invalid_argument(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class PromptStage { kGround, kSummarize, kFocus };

/// Placeholders: {instruction} in every template (exactly once), {summary}
/// in the focus template, {context} in the grounding template. The
/// {context} slot receives prior summary/focus analysis rendered with the
/// chain markers, or nothing.
struct PromptTemplateSet {
  std::string grounding_template;
  std::string summary_template;
  std::string focus_template;

  static PromptTemplateSet defaults();

  /// Throws PromptError(kMalformedTemplate).
  void validate() const;
};

/// Reads {"grounding": ..., "summary": ..., "focus": ...}. Missing keys
/// keep their defaults.
PromptTemplateSet load_templates(const std::filesystem::path& path);

struct PromptContext {
  std::optional<std::string> summary;
  std::optional<std::string> focus;
};

std::string build_prompt(PromptStage stage, std::string_view instruction,
                         const PromptContext& context,
                         const PromptTemplateSet& templates);

}  // namespace dualground
