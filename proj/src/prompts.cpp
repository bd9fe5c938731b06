// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dualground Authors

#include "dualground/prompts.hpp"

#include <fstream>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dualground/chain_grammar.hpp"

namespace dualground {
namespace {

constexpr std::string_view kInstruction = "{instruction}";
constexpr std::string_view kSummary = "{summary}";
constexpr std::string_view kContext = "{context}";

std::size_t count_of(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void require_count(std::string_view tmpl, std::string_view name,
                   std::string_view placeholder, std::size_t lo,
                   std::size_t hi) {
  const auto n = count_of(tmpl, placeholder);
  if (n < lo || n > hi) {
    throw PromptError(
        PromptError::Kind::kMalformedTemplate,
        fmt::format("{} template has {} occurrences of {}", name, n, placeholder));
  }
}

// Single pass so substituted text is never rescanned for placeholders.
std::string substitute(std::string_view tmpl,
                       const std::map<std::string_view, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    bool replaced = false;
    if (tmpl[pos] == '{') {
      for (const auto& [key, value] : values) {
        if (tmpl.substr(pos, key.size()) == key) {
          out += value;
          pos += key.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += tmpl[pos++];
  }
  return out;
}

std::string context_block(const PromptContext& ctx) {
  if (!ctx.summary) return {};
  std::string block = "Prior analysis:\n";
  block += tokens::kSummaryStart;
  block += *ctx.summary;
  block += tokens::kSummaryEnd;
  if (ctx.focus) {
    block += tokens::kFocusStart;
    block += *ctx.focus;
    block += tokens::kFocusEnd;
  }
  block += '\n';
  return block;
}

}  // namespace

PromptTemplateSet PromptTemplateSet::defaults() {
  return {
      "You are an expert at locating interface elements in GUI screenshots.\n"
      "Given the screenshot and the instruction, output the target element's "
      "location as normalized (x,y) coordinates in [0,1].\n"
      "{context}Instruction: {instruction}",

      "Describe the layout of this GUI screenshot and the hierarchy of its "
      "elements, concentrating on what matters for the instruction. Do not "
      "give coordinates.\n"
      "Instruction: {instruction}",

      "Interface summary:\n{summary}\n"
      "Examine the candidate elements for the instruction in detail: "
      "relative and absolute position, shape, color, and neighbouring "
      "controls. Do not give coordinates.\n"
      "Instruction: {instruction}",
  };
}

void PromptTemplateSet::validate() const {
  require_count(grounding_template, "grounding", kInstruction, 1, 1);
  require_count(grounding_template, "grounding", kContext, 0, 1);
  require_count(summary_template, "summary", kInstruction, 1, 1);
  require_count(focus_template, "focus", kInstruction, 1, 1);
  require_count(focus_template, "focus", kSummary, 1, 1);
}

PromptTemplateSet load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(
        fmt::format("cannot open template file '{}'", path.string()));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PromptError(PromptError::Kind::kMalformedTemplate,
                      fmt::format("{}: {}", path.string(), e.what()));
  }
  auto t = PromptTemplateSet::defaults();
  t.grounding_template = j.value("grounding", t.grounding_template);
  t.summary_template = j.value("summary", t.summary_template);
  t.focus_template = j.value("focus", t.focus_template);
  t.validate();
  return t;
}

std::string build_prompt(PromptStage stage, std::string_view instruction,
                         const PromptContext& context,
                         const PromptTemplateSet& templates) {
  templates.validate();
  const std::string instr(instruction);
  switch (stage) {
    case PromptStage::kSummarize:
      return substitute(templates.summary_template, {{kInstruction, instr}});
    case PromptStage::kFocus:
      if (!context.summary) {
        throw PromptError(PromptError::Kind::kMissingContext,
                          "focus prompt requires a summary");
      }
      return substitute(templates.focus_template,
                        {{kInstruction, instr}, {kSummary, *context.summary}});
    case PromptStage::kGround:
      if (context.focus && !context.summary) {
        throw PromptError(PromptError::Kind::kMissingContext,
                          "grounding with focus context requires a summary");
      }
      if (context.summary && count_of(templates.grounding_template, kContext) == 0) {
        throw PromptError(PromptError::Kind::kMalformedTemplate,
                          "grounding template has no {context} slot");
      }
      return substitute(templates.grounding_template,
                        {{kInstruction, instr}, {kContext, context_block(context)}});
  }
  return {};
}

}  // namespace dualground
